"""Exact Hamiltonian, Lax-Friedrichs numerical Hamiltonian and the CFL step."""

from __future__ import annotations

import math

import numpy as np

from .errors import ContractError
from .grid import Grid4D
from .model import HybridModel


def exact_hamiltonian(model: HybridModel, s: float, x, q: int, z, n_u: int = 50):
    """``sup_u f(s, x, u, q) . z``; closed form when the model provides one.

    ``x`` has shape ``(..., d)`` and ``z`` shape ``(..., d)``; returns shape ``(...)``.
    """
    z = np.asarray(z, dtype=float)
    closed = getattr(model, "closed_form_hamiltonian", None)
    if closed is not None:
        return closed(q, z)
    x = np.asarray(x, dtype=float)
    best = None
    for u in model.control_samples(q, n_u):
        val = np.sum(np.asarray(model.dynamics(s, x, u, q)) * z, axis=-1)
        best = val if best is None else np.maximum(best, val)
    return best


def dissipation_constants(model: HybridModel, grid: Grid4D | None = None, n_samples: int = 5,
                          n_u: int = 50) -> np.ndarray:
    """Per-dimension bound ``c_j = max |f_j|`` over modes, controls, nodes and sampled times.

    Since the Hamiltonian is a supremum of functions linear in ``z`` this
    bounds ``|dH/dz_j|``.
    """
    if grid is not None:
        pts = grid.points()
        times = np.linspace(0.0, grid.horizon, max(n_samples, 1))
    else:
        pts = np.zeros(model.dim)
        times = np.array([0.0])
    c = np.zeros(model.dim)
    for q in range(model.num_modes):
        controls = np.concatenate([model.control_samples(q, n_u), model.hamiltonian_controls(q, n_u)])
        for u in controls:
            for s in times:
                vel = np.asarray(model.dynamics(s, pts, u, q), dtype=float).reshape(-1, model.dim)
                c = np.maximum(c, np.abs(vel).max(axis=0))
    return c


class NumericalHamiltonian:
    """Local Lax-Friedrichs flux with globally computed dissipation constants."""

    def __init__(self, model: HybridModel, dissipation=None, n_u: int = 50, grid: Grid4D | None = None):
        self.model = model
        self.n_u = n_u
        if dissipation is None:
            dissipation = dissipation_constants(model, grid, n_u=n_u)
        self.c = np.asarray(dissipation, dtype=float)
        if self.c.shape != (model.dim,) or np.any(self.c < 0):
            raise ContractError("dissipation constants must be nonnegative, one per dimension")

    def __call__(self, s: float, x, q: int, d_minus, d_plus):
        """Flux from backward differences ``d_minus`` and forward ``d_plus`` (shape ``(..., d)``)."""
        d_minus = np.asarray(d_minus, dtype=float)
        d_plus = np.asarray(d_plus, dtype=float)
        h = exact_hamiltonian(self.model, s, x, q, 0.5 * (d_plus + d_minus), self.n_u)
        return h - np.sum(self.c * 0.5 * (d_plus - d_minus), axis=-1)

    def velocities(self, s: float, x, q: int) -> list:
        """Velocities of the controls the supremum ranges over, one array per control."""
        return [np.asarray(self.model.dynamics(s, x, u, q), dtype=float)
                for u in self.model.hamiltonian_controls(q, self.n_u)]


def llf_flux(nh: NumericalHamiltonian, s, x, q, a_plus, a_minus, b_plus, b_minus):
    """Two-dimensional Lax-Friedrichs flux in the ``(a, b)`` difference notation."""
    d_minus = np.stack(np.broadcast_arrays(np.asarray(a_minus, float), np.asarray(b_minus, float)), axis=-1)
    d_plus = np.stack(np.broadcast_arrays(np.asarray(a_plus, float), np.asarray(b_plus, float)), axis=-1)
    out = nh(s, x, q, d_minus, d_plus)
    return float(out) if np.ndim(out) == 0 else out


def cfl_timestep(dx: float, dp: float, c, cfl_factor: float = 0.9) -> float:
    """``dt = factor / (1/dp + sum(c)/dx)``; ``dp = inf`` drops the lock term."""
    if not 0 < cfl_factor <= 1:
        raise ContractError(f"cfl_factor must lie in (0, 1], got {cfl_factor}")
    if not (dx > 0 and dp > 0):
        raise ContractError("spacings must be positive")
    rate = (0.0 if math.isinf(dp) else 1.0 / dp) + float(np.sum(c)) / dx
    if rate == 0:
        raise ContractError("no transport: CFL bound is unbounded")
    return cfl_factor / rate
