"""Hybrid system description and clipped level-set functions.

A :class:`HybridModel` bundles the per-mode continuous dynamics, the discrete
switch map, the per-mode control boxes and decision sets, the decision lag and
the two sets of the reachability problem (admissible set ``K`` and initial
set ``X0``).  Sets are represented by :class:`LevelSetFn` objects whose values
are signed distances clipped to ``[-L_K, L_K]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ContractError, InadmissibleDecisionError


class LevelSetFn:
    """Clipped level-set function of a set: ``<= 0`` exactly on the set."""

    kind = "abstract"

    def __init__(self, clip_bound: float = 1.0):
        if not clip_bound > 0:
            raise ContractError(f"clip bound must be positive, got {clip_bound}")
        self.clip_bound = float(clip_bound)

    def signed_distance(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x) -> np.ndarray | float:
        x = np.asarray(x, dtype=float)
        d = np.clip(self.signed_distance(x), -self.clip_bound, self.clip_bound)
        return float(d) if d.ndim == 0 else d

    def contains(self, x) -> np.ndarray | bool:
        return self(x) <= 0


class BallSet(LevelSetFn):
    kind = "ball"

    def __init__(self, center: Sequence[float], radius: float, clip_bound: float = 1.0):
        super().__init__(clip_bound)
        if radius < 0:
            raise ContractError("ball radius must be nonnegative")
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)

    def signed_distance(self, x):
        return np.hypot.reduce(x - self.center, axis=-1) - self.radius

    def __repr__(self):
        return f"BallSet(center={self.center.tolist()}, radius={self.radius}, clip_bound={self.clip_bound})"


class BoxSet(LevelSetFn):
    """Axis-aligned box ``[lower, upper]`` with exact signed distance."""

    kind = "box"

    def __init__(self, lower: Sequence[float], upper: Sequence[float], clip_bound: float = 1.0):
        super().__init__(clip_bound)
        self.lower = np.asarray(lower, dtype=float)
        self.upper = np.asarray(upper, dtype=float)
        if np.any(self.upper < self.lower):
            raise ContractError("box upper bound below lower bound")

    def signed_distance(self, x):
        q = np.maximum(self.lower - x, x - self.upper)
        outside = np.hypot.reduce(np.maximum(q, 0.0), axis=-1)
        inside = np.minimum(np.max(q, axis=-1), 0.0)
        return outside + inside

    def __repr__(self):
        return f"BoxSet(lower={self.lower.tolist()}, upper={self.upper.tolist()}, clip_bound={self.clip_bound})"


class TabulatedSet(LevelSetFn):
    """Level-set values sampled on a regular grid, read back by nearest node."""

    kind = "tabulated"

    def __init__(self, origin: Sequence[float], spacing: Sequence[float], values: np.ndarray,
                 clip_bound: float = 1.0):
        super().__init__(clip_bound)
        self.origin = np.asarray(origin, dtype=float)
        self.spacing = np.asarray(spacing, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.values.ndim != self.origin.size:
            raise ContractError("table rank does not match origin dimension")

    def signed_distance(self, x):
        idx = np.rint((x - self.origin) / self.spacing).astype(int)
        idx = np.clip(idx, 0, np.array(self.values.shape) - 1)
        return self.values[tuple(np.moveaxis(idx, -1, 0))]


@dataclass
class HybridModel:
    """Switched system with controlled mode changes and a decision lag.

    ``dynamics(s, x, u, q)`` must accept ``x`` with shape ``(..., d)`` and
    return velocities of the same shape.  ``switch_map(w, q)`` returns the
    post-switch mode.
    """

    num_modes: int
    dim: int
    dynamics: Callable
    switch_map: Callable[[int, int], int]
    control_lower: list
    control_upper: list
    switch_decisions: list
    lag_delta: float
    admissible_set: LevelSetFn
    initial_set: LevelSetFn
    dynamics_bound: float = np.inf

    def __post_init__(self):
        if self.num_modes < 1:
            raise ContractError("num_modes must be positive")
        if not self.lag_delta > 0:
            raise ContractError(f"decision lag must be positive, got {self.lag_delta}")
        self.control_lower = [np.atleast_1d(np.asarray(b, dtype=float)) for b in self.control_lower]
        self.control_upper = [np.atleast_1d(np.asarray(b, dtype=float)) for b in self.control_upper]
        if len(self.control_lower) != self.num_modes or len(self.control_upper) != self.num_modes:
            raise ContractError("control bounds must be given for every mode")
        self.switch_decisions = [tuple(int(w) for w in ws) for ws in self.switch_decisions]
        if len(self.switch_decisions) != self.num_modes:
            raise ContractError("switch decisions must be given for every mode")
        for q, ws in enumerate(self.switch_decisions):
            for w in ws:
                target = self.switch_map(w, q)
                if not 0 <= target < self.num_modes:
                    raise ContractError(f"switch map sends (w={w}, q={q}) to invalid mode {target}")

    def check_mode(self, q: int):
        if not 0 <= q < self.num_modes:
            raise ContractError(f"mode {q} out of range [0, {self.num_modes})")

    def check_control(self, u, q: int):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        lo, hi = self.control_lower[q], self.control_upper[q]
        if u.shape[-1] != lo.size or np.any(u < lo - 1e-12) or np.any(u > hi + 1e-12):
            raise ContractError(f"control {u.tolist()} outside U({q}) = [{lo.tolist()}, {hi.tolist()}]")
        return u

    def eval_dynamics(self, s: float, x, u, q: int) -> np.ndarray:
        """Velocity ``f(s, x, u, q)`` with contract checks on mode and control."""
        self.check_mode(q)
        u = self.check_control(u, q)
        return np.asarray(self.dynamics(s, np.asarray(x, dtype=float), u, q), dtype=float)

    def eval_switch(self, w: int, q: int) -> int:
        self.check_mode(q)
        if w not in self.switch_decisions[q]:
            raise InadmissibleDecisionError(f"decision {w} not in W({q}) = {self.switch_decisions[q]}")
        return int(self.switch_map(w, q))

    def control_samples(self, q: int, count: int = 50) -> np.ndarray:
        """Uniform tensor grid of ``count`` points per axis over U(q), endpoints included."""
        lo, hi = self.control_lower[q], self.control_upper[q]
        axes = [np.linspace(a, b, count) if b > a else np.array([a]) for a, b in zip(lo, hi)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def hamiltonian_controls(self, q: int, count: int = 50) -> np.ndarray:
        """Controls over which the Hamiltonian supremum is taken."""
        return self.control_samples(q, count)

    def check_bounded(self, num_samples: int = 10_000, seed: int = 0, horizon: float = 1.0) -> float:
        """Largest sampled speed ``|f|`` over K; raises if it exceeds ``dynamics_bound``."""
        rng = np.random.default_rng(seed)
        lo, hi = _sampling_box(self.admissible_set, self.dim)
        worst = 0.0
        for _ in range(num_samples):
            q = int(rng.integers(self.num_modes))
            x = rng.uniform(lo, hi)
            u = rng.uniform(self.control_lower[q], self.control_upper[q])
            worst = max(worst, float(np.linalg.norm(self.dynamics(rng.uniform(0, horizon), x, u, q))))
        if worst > self.dynamics_bound * (1 + 1e-12):
            raise ContractError(f"sampled speed {worst} exceeds bound {self.dynamics_bound}")
        return worst

    def eval_target_fn(self, x):
        return self.initial_set(x)

    def eval_obstacle_fn(self, x):
        return self.admissible_set(x)


def _sampling_box(s: LevelSetFn, dim: int):
    if isinstance(s, BoxSet):
        return s.lower, s.upper
    if isinstance(s, BallSet):
        return s.center - s.radius, s.center + s.radius
    return -np.ones(dim), np.ones(dim)


def _vehicle_switch(w: int, q: int) -> int:
    return abs(q - w)


class VehicleModel(HybridModel):
    """Two-source vehicle energy model: battery charge and range-extender fuel.

    Mode 0 has the range extender off, mode 1 on.  The dynamics is
    ``(-a_x + q u, -q (a_y + u))`` with ``u`` in ``[0, u_max]`` and the switch
    map is ``|q - w|``.
    """

    def __init__(self, a_x: float = 0.1, a_y: float = 0.15, u_max: float = 0.07,
                 lag_delta: float = 2.0, admissible_set: LevelSetFn | None = None,
                 initial_set: LevelSetFn | None = None, switch_policy: str = "toggle"):
        if a_x <= 0 or a_y <= 0:
            raise ContractError("depletion rates a_x, a_y must be positive")
        if u_max < 0:
            raise ContractError("u_max must be nonnegative")
        self.a_x, self.a_y, self.u_max = float(a_x), float(a_y), float(u_max)
        if switch_policy == "toggle":
            decisions = [(1,), (1,)]
        elif switch_policy == "full":
            decisions = [(0, 1), (0, 1)]
        elif switch_policy == "none":
            decisions = [(), ()]
        else:
            raise ContractError(f"unknown switch policy {switch_policy!r}")
        self.switch_policy = switch_policy
        super().__init__(
            num_modes=2,
            dim=2,
            dynamics=self._dynamics,
            switch_map=_vehicle_switch,
            control_lower=[[0.0], [0.0]],
            control_upper=[[self.u_max], [self.u_max]],
            switch_decisions=decisions,
            lag_delta=lag_delta,
            admissible_set=admissible_set if admissible_set is not None else BoxSet([0, 0], [1, 1]),
            initial_set=initial_set if initial_set is not None else BallSet([0.3, 0.8], 0.05),
            dynamics_bound=float(np.hypot(a_x + u_max, a_y + u_max)),
        )

    def _dynamics(self, s, x, u, q):
        x = np.asarray(x, dtype=float)
        uu = float(np.asarray(u).ravel()[0])
        vel = np.array([-self.a_x + q * uu, -q * (self.a_y + uu)])
        return np.broadcast_to(vel, x.shape).copy() if x.ndim > 1 else vel

    def hamiltonian_controls(self, q: int, count: int = 50) -> np.ndarray:
        # affine in u: the supremum over [0, u_max] is attained at an endpoint
        return np.array([[0.0], [self.u_max]])

    def closed_form_hamiltonian(self, q: int, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        z1, z2 = z[..., 0], z[..., 1]
        return -self.a_x * z1 - q * self.a_y * z2 + q * self.u_max * np.maximum(0.0, z1 - z2)
