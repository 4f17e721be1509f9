"""Explicit time marching of the discrete quasi-variational system.

Interior nodes (``k >= 1``) take an upwind step in the lock variable and a
Lax-Friedrichs step in state, floored by the obstacle.  The ``k = 0`` row is
the switch operator: the minimum over admissible decisions and lock levels at
or above the lag.  The outer ring of state nodes is held at ``+L_K``.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import CFLViolationError, ContractError, SolverError
from .grid import Grid4D, build_grid, upwind_gradients
from .hamiltonian import NumericalHamiltonian, cfl_timestep, dissipation_constants
from .model import HybridModel
from .reachability import Autonomy, autonomy_from_masks, min_value_maps, reachable_mask

logger = logging.getLogger(__name__)


@dataclass
class SchemeConfig:
    dx: float = 0.025
    dp: float = 0.05
    horizon: float = 10.0
    cfl_factor: float = 0.9
    clip_bound: float = 1.0
    margin: float = 0.1
    n_u: int = 50
    tol: float = 0.0
    output_cadence: int = 0
    snapshot_times: tuple = ()
    keep_fields_at: tuple = ()
    early_stop: bool = True

    def __post_init__(self):
        for name in ("dx", "dp", "horizon", "cfl_factor", "clip_bound", "margin"):
            if not getattr(self, name) > 0:
                raise ContractError(f"{name} must be positive, got {getattr(self, name)}")
        if self.cfl_factor > 1:
            raise ContractError("cfl_factor must not exceed 1")
        if self.n_u < 2:
            raise ContractError("n_u must be at least 2")
        if self.tol < 0 or self.output_cadence < 0:
            raise ContractError("tol and output_cadence must be nonnegative")
        self.snapshot_times = tuple(float(s) for s in self.snapshot_times)
        self.keep_fields_at = tuple(float(s) for s in self.keep_fields_at)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["snapshot_times"] = list(self.snapshot_times)
        d["keep_fields_at"] = list(self.keep_fields_at)
        return d


@dataclass
class StepRecord:
    n: int
    time: float
    mask: np.ndarray
    empty: bool


@dataclass
class SolveResult:
    grid: Grid4D
    records: list = field(default_factory=list)
    min_maps: dict = field(default_factory=dict)
    fields: dict = field(default_factory=dict)
    autonomy: Autonomy = Autonomy(None, None, None)
    wall_time: float = 0.0
    final_field: np.ndarray | None = None

    @property
    def times(self) -> np.ndarray:
        return np.array([r.time for r in self.records])


def initialize(grid: Grid4D, target, obstacle) -> np.ndarray:
    """Initial field ``max(target(x), obstacle(x))`` copied over every mode and lock level."""
    pts = grid.points()
    base = np.maximum(target(pts), obstacle(pts))
    return np.broadcast_to(base, grid.shape).copy()


def interior_update(field: np.ndarray, grid: Grid4D, nh: NumericalHamiltonian, obstacle_value: float,
                    I, q: int, k: int, n: int, clip_bound: float = 1.0) -> float:
    """Single-node update written directly with the numerical Hamiltonian."""
    if k < 1:
        raise ContractError("interior update needs k >= 1")
    I = tuple(I)
    v = field[(q, k) + I]
    v_prev = field[(q, k - 1) + I]
    dm, dp = upwind_gradients(field, grid, I, q, k)
    x = np.array([grid.axes[j][i] for j, i in enumerate(I)])
    flux = nh(n * grid.dt, x, q, dm, dp)
    val = v - grid.dt * ((v - v_prev) / grid.dp + float(flux))
    return float(np.clip(max(obstacle_value, val), -clip_bound, clip_bound))


def switch_row_update(field: np.ndarray, grid: Grid4D, model: HybridModel, I, q: int,
                      clip_bound: float = 1.0) -> float:
    """Minimum of ``field[g(w, q), k', I]`` over decisions ``w`` and ``k' >= k_min``."""
    k_min = grid.k_min(model.lag_delta)
    best = clip_bound
    if k_min > grid.num_p:
        return best
    for w in model.switch_decisions[q]:
        target = model.switch_map(w, q)
        best = min(best, float(field[(target, slice(k_min, None)) + tuple(I)].min()))
    return best


class Solver:
    """Marching engine for one model on one grid.

    ``workers`` splits each step over slabs of the first state axis; every
    node is computed by the same elementwise arithmetic, so the output does
    not depend on the worker count.
    """

    def __init__(self, model: HybridModel, config: SchemeConfig, grid: Grid4D | None = None,
                 workers: int = 1):
        self.model = model
        self.config = config
        if grid is None:
            grid = build_grid(model, config.dx, config.dp, config.horizon, config.margin)
        if config.horizon < model.lag_delta:
            logger.info("horizon %.3g shorter than the decision lag %.3g", config.horizon, model.lag_delta)
        if config.dp > model.lag_delta:
            logger.warning("dp %.3g exceeds the lag %.3g; the lag is rounded up to one lock cell",
                           config.dp, model.lag_delta)
        self.nh = NumericalHamiltonian(model, dissipation_constants(model, grid, n_u=config.n_u), n_u=config.n_u)
        dt = grid.dt if grid.dt > 0 else cfl_timestep(grid.dx, grid.dp, self.nh.c, config.cfl_factor)
        self.grid = grid if grid.dt == dt else grid.with_dt(dt)
        self.workers = max(1, int(workers))
        self.L = config.clip_bound
        pts = self.grid.points()
        self.obstacle = np.clip(model.admissible_set.signed_distance(pts), -self.L, self.L)
        self.target = np.clip(model.initial_set.signed_distance(pts), -self.L, self.L)
        self.in_k = self.obstacle <= 0
        self.boundary = self.grid.boundary_mask()
        self.k_min = self.grid.k_min(model.lag_delta)
        self._interior_pts = pts[(slice(1, -1),) * self.grid.dim]
        self._executor = None

    @property
    def dt(self) -> float:
        return self.grid.dt

    def cfl_bound(self) -> float:
        return cfl_timestep(self.grid.dx, self.grid.dp, self.nh.c, 1.0)

    def initial_field(self) -> np.ndarray:
        return np.broadcast_to(np.maximum(self.target, self.obstacle), self.grid.shape).copy()

    def _chunks(self):
        n0 = self.grid.x_shape[0] - 2
        parts = min(self.workers, n0)
        edges = np.linspace(0, n0, parts + 1).round().astype(int) + 1
        return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]

    def _update_slab(self, field, out, q, velocities, i0, i1):
        g = self.grid
        d = g.dim
        dt, dx, dp = g.dt, g.dx, g.dp
        c = self.nh.c
        inner = [(i0, i1)] + [(1, n - 1) for n in g.x_shape[1:]]

        def view(k_sl, offset_axis=None, offset=0):
            sl = []
            for j, (a, b) in enumerate(inner):
                if j == offset_axis:
                    a, b = a + offset, b + offset
                sl.append(slice(a, b))
            return field[(q, k_sl) + tuple(sl)]

        center = view(slice(1, None))
        below = view(slice(0, -1))
        w_self = 1.0 - dt / dp - dt * float(np.sum(c)) / dx
        w_lock = dt / dp
        xs = (slice(i0 - 1, i1 - 1),) + (slice(None),) * (d - 1)
        best = None
        for vel in velocities:
            acc = w_self * center
            acc += w_lock * below
            for j in range(d):
                fj = vel[xs + (j,)] if np.ndim(vel) > 1 else vel[j]
                acc += (dt * (c[j] - fj) / (2 * dx)) * view(slice(1, None), j, 1)
                acc += (dt * (c[j] + fj) / (2 * dx)) * view(slice(1, None), j, -1)
            best = acc if best is None else np.minimum(best, acc)
        floor = self.obstacle[tuple(slice(a, b) for a, b in inner)]
        sl = (q, slice(1, None)) + tuple(slice(a, b) for a, b in inner)
        out[sl] = np.clip(np.maximum(floor, best), -self.L, self.L)

    def step(self, field: np.ndarray, n: int) -> np.ndarray:
        """Advance one time level; reads only ``field``."""
        if self.grid.dt > self.cfl_bound() * (1 + 1e-12):
            raise CFLViolationError(f"dt={self.grid.dt} exceeds CFL bound {self.cfl_bound()}")
        if field.shape != self.grid.shape:
            raise ContractError(f"field shape {field.shape} does not match grid {self.grid.shape}")
        out = np.empty_like(field)
        s = n * self.grid.dt
        jobs = []
        for q in range(self.model.num_modes):
            vels = self._velocities(s, q)
            for i0, i1 in self._chunks():
                jobs.append((q, vels, i0, i1))
        if self.workers > 1 and len(jobs) > 1:
            if self._executor is None:
                self._executor = ThreadPoolExecutor(self.workers)
            list(self._executor.map(lambda job: self._update_slab(field, out, *job), jobs))
        else:
            for job in jobs:
                self._update_slab(field, out, *job)
        self._switch_rows(field, out)
        out[(slice(None), slice(None)) + np.nonzero(self.boundary)] = self.L
        return out

    def _velocities(self, s, q):
        controls = self.model.hamiltonian_controls(q, self.nh.n_u)
        vels = []
        for u in controls:
            v = np.asarray(self.model.dynamics(s, self._interior_pts, u, q), dtype=float)
            # spatially constant fields collapse to a single vector
            if v.ndim > 1 and np.all(v == v.reshape(-1, self.grid.dim)[0]):
                v = v.reshape(-1, self.grid.dim)[0].copy()
            vels.append(v)
        return vels

    def _switch_rows(self, field, out):
        for q in range(self.model.num_modes):
            row = np.full(self.grid.x_shape, self.L)
            if self.k_min <= self.grid.num_p:
                for w in self.model.switch_decisions[q]:
                    target = self.model.switch_map(w, q)
                    np.minimum(row, field[target, self.k_min:].min(axis=0), out=row)
            out[q, 0] = np.clip(row, -self.L, self.L)

    def close(self):
        if self._executor is not None:
            self._executor.shutdown()
            self._executor = None

    def _snapshot_steps(self, times) -> set:
        return {int(round(s / self.grid.dt)) for s in times}

    def run(self, on_step=None) -> SolveResult:
        """March from the initial field until the horizon or the first empty mask.

        ``on_step(n, field)`` is called after every time level, including ``n = 0``.
        """
        cfg = self.config
        g = self.grid
        start = time.perf_counter()
        result = SolveResult(grid=g)
        snaps = self._snapshot_steps(cfg.snapshot_times)
        keep = self._snapshot_steps(cfg.keep_fields_at)
        # requested exports past the first empty mask still get written
        last_export = max(snaps | keep, default=0)
        field_n = self.initial_field()
        try:
            for n in range(g.num_steps + 1):
                if n > 0:
                    field_n = self.step(field_n, n - 1)
                    if not np.all(np.isfinite(field_n)):
                        bad = np.argwhere(~np.isfinite(field_n))[0]
                        raise SolverError(f"non-finite value at step {n}, index {tuple(bad)}")
                if on_step is not None:
                    on_step(n, field_n)
                t = n * g.dt
                mask = reachable_mask(field_n, self.in_k, cfg.tol)
                empty = not mask.any()
                result.records.append(StepRecord(n, t, mask, empty))
                if n == 0 or n in snaps or (cfg.output_cadence and n % cfg.output_cadence == 0):
                    result.min_maps[n] = min_value_maps(field_n)
                if n in keep:
                    result.fields[n] = field_n.copy()
                if cfg.early_stop and n >= last_export and any(r.empty for r in result.records):
                    break
        finally:
            self.close()
        result.final_field = field_n
        result.min_maps[result.records[-1].n] = min_value_maps(field_n)
        result.autonomy = autonomy_from_masks([r.time for r in result.records],
                                              [r.empty for r in result.records])
        result.wall_time = time.perf_counter() - start
        logger.info("solve finished: %d steps, autonomy %s, %.1fs", len(result.records) - 1,
                    result.autonomy, result.wall_time)
        return result


def step(field: np.ndarray, solver: Solver, n: int) -> np.ndarray:
    return solver.step(field, n)


def run(model: HybridModel, config: SchemeConfig, workers: int = 1, on_step=None) -> SolveResult:
    return Solver(model, config, workers=workers).run(on_step)
