"""Independent checks: closed-form vehicle autonomy, brute-force simulation,
sampled admissible costs and the convergence table harness."""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, HybridReachError
from .grid import Grid4D
from .model import BallSet, HybridModel, LevelSetFn, VehicleModel


def analytic_autonomy(x0: float, y0: float, a_x: float, a_y: float, u_max: float) -> float:
    """Longest time the battery of the vehicle model stays nonnegative.

    Burn fuel at full power until the tank is empty, then run on battery.
    If the battery runs out first, the autonomy is ``x0 / (a_x - u_max)``.
    """
    if a_x <= u_max:
        raise ContractError("battery non-depleting while fueled (a_x <= u_max); closed form inapplicable")
    if a_y + u_max <= 0:
        raise ContractError("a_y + u_max must be positive")
    t_fuel = y0 / (a_y + u_max)
    if x0 * (a_y + u_max) <= y0 * (a_x - u_max):
        return x0 / (a_x - u_max)
    return (x0 + u_max * t_fuel) / a_x


def simulate_best_policy(x0: float, y0: float, model: VehicleModel, dt_fine: float = 1e-5) -> float:
    """Forward-Euler run of "range extender at full power until the tank is dry, then off"."""
    x, y, s = float(x0), float(y0), 0.0
    q = 1 if y > 0 else 0
    a_x, a_y, u = model.a_x, model.a_y, model.u_max
    while x > 0:
        if q == 1 and y <= 0:
            q = 0
        if q == 1:
            x += dt_fine * (-a_x + u)
            y -= dt_fine * (a_y + u)
        else:
            x -= dt_fine * a_x
        s += dt_fine
        if s > 1e7 * dt_fine:
            raise HybridReachError("simulation did not terminate")
    return s


def interpolate_value(field: np.ndarray, grid: Grid4D, x, q: int, p: float) -> float:
    """Multilinear interpolation of ``field[q]`` in state and lock level."""
    coords = [(p / grid.dp, grid.num_p)]
    coords += [((xi - lo) / grid.dx, n - 1) for xi, lo, n in zip(np.asarray(x, float), grid.x_min, grid.x_shape)]
    base, frac = [], []
    for r, n in coords:
        r = min(max(r, 0.0), float(n))
        i = min(int(math.floor(r)), n - 1) if n > 0 else 0
        base.append(i)
        frac.append(r - i)
    total = 0.0
    for corner in range(2 ** len(coords)):
        weight = 1.0
        idx = []
        for j, (i, f) in enumerate(zip(base, frac)):
            bit = (corner >> j) & 1
            if bit and f == 0.0:
                weight = 0.0
                break
            weight *= f if bit else 1.0 - f
            idx.append(i + bit)
        if weight:
            total += weight * field[(q,) + tuple(idx)]
    return float(total)


def _sample_in(level_set: LevelSetFn, dim: int, rng) -> np.ndarray:
    if isinstance(level_set, BallSet):
        while True:
            x = level_set.center + level_set.radius * rng.uniform(-1, 1, dim)
            if level_set.signed_distance(x) <= 0:
                return x
    raise ContractError("initial-set sampling needs a ball initial set")


@dataclass
class CostSample:
    endpoint: np.ndarray
    mode: int
    lock: float
    time: float
    cost: float
    start: np.ndarray
    switch_times: tuple
    grid_value: float = math.nan


def sample_trajectory(model: HybridModel, s_end: float, rng, clip_bound: float = 1.0,
                      n_pieces: int = 4, dt_int: float = 1e-3) -> CostSample:
    """Random admissible hybrid control on ``[0, s_end]`` and its penalized cost.

    Decision gaps are at least the lag and the number of switches is capped
    at ``floor(s_end / lag)``.
    """
    delta = model.lag_delta
    max_switches = int(math.floor(s_end / delta + 1e-12))
    switches = []
    t = rng.uniform(0, s_end) if rng.random() < 0.7 else s_end + 1
    q = int(rng.integers(model.num_modes))
    q0 = q
    while t < s_end and len(switches) < max_switches:
        switches.append(t)
        t += delta + rng.exponential(delta)
    assert len(switches) <= max_switches
    assert all(b - a >= delta for a, b in zip(switches, switches[1:]))
    cuts = np.sort(rng.uniform(0, s_end, n_pieces - 1))
    breaks = np.concatenate([[0.0], cuts, [s_end]])
    start = _sample_in(model.initial_set, model.dim, rng)

    def phi(z, lvl):
        return float(np.clip(lvl.signed_distance(z), -clip_bound, clip_bound))

    y = start.copy()
    worst = phi(y, model.admissible_set)
    n_steps = max(1, int(math.ceil(s_end / dt_int)))
    h = s_end / n_steps
    sw_iter = iter(switches)
    next_sw = next(sw_iter, math.inf)
    piece = 0
    u = rng.uniform(model.control_lower[q], model.control_upper[q])
    for i in range(n_steps):
        tau = i * h
        while tau >= next_sw:
            decisions = model.switch_decisions[q]
            if decisions:
                q = model.eval_switch(int(rng.choice(decisions)), q)
            next_sw = next(sw_iter, math.inf)
        while piece + 1 < len(breaks) - 1 and tau >= breaks[piece + 1]:
            piece += 1
            u = rng.uniform(model.control_lower[q], model.control_upper[q])
        u = np.clip(u, model.control_lower[q], model.control_upper[q])
        y = y + h * np.asarray(model.dynamics(tau, y, u, q), dtype=float)
        worst = max(worst, phi(y, model.admissible_set))
    lock = s_end - switches[-1] if switches else delta + s_end
    cost = max(phi(start, model.initial_set), worst)
    return CostSample(y, q, lock, s_end, cost, start, tuple(switches))


def sample_admissible_cost(model: HybridModel, result, num_samples: int = 200, seed: int = 0,
                           clip_bound: float = 1.0) -> list:
    """Sampled admissible trajectories with the interpolated grid value at their endpoints.

    ``result`` must retain full fields (``SchemeConfig.keep_fields_at``); each
    sample ends at one of the retained step times.
    """
    if not result.fields:
        raise ContractError("solve result retains no fields")
    rng = np.random.default_rng(seed)
    grid = result.grid
    steps = sorted(result.fields)
    out = []
    for _ in range(num_samples):
        n = steps[int(rng.integers(len(steps)))]
        s_end = n * grid.dt
        if s_end <= 0:
            continue
        smp = sample_trajectory(model, s_end, rng, clip_bound)
        lock = min(smp.lock, grid.num_p * grid.dp)
        smp.grid_value = interpolate_value(result.fields[n], grid, smp.endpoint, smp.mode, lock)
        out.append(smp)
    return out


@dataclass
class TableRow:
    x0: float
    y0: float
    dx: float
    exact: float
    estimate: float | None
    error: float | None
    bracket: tuple | None
    runtime: float
    note: str = ""


def convergence_table(instances, dx_list, config, params: dict, workers: int = 1, jobs: int = 1) -> list:
    """Solve every ``(instance, dx)`` pair and compare with the closed-form autonomy.

    ``params`` holds ``a_x, a_y, u_max, delta`` and optionally
    ``radius_cells`` (initial ball radius in cells, default 2).
    """
    from dataclasses import replace

    from .model import BoxSet
    from .solver import Solver

    def one(job):
        (x0, y0), dx = job
        exact = analytic_autonomy(x0, y0, params["a_x"], params["a_y"], params["u_max"])
        t0 = time.perf_counter()
        try:
            radius = params.get("radius_cells", 2.0) * dx
            model = VehicleModel(params["a_x"], params["a_y"], params["u_max"], params["delta"],
                                 BoxSet([0, 0], [1, 1]), BallSet([x0, y0], radius),
                                 params.get("switch_policy", "toggle"))
            cfg = replace(config, dx=dx, snapshot_times=(), keep_fields_at=(), output_cadence=0)
            res = Solver(model, cfg, workers=workers).run()
        except HybridReachError as exc:
            return TableRow(x0, y0, dx, exact, None, None, None, time.perf_counter() - t0, f"error: {exc}")
        a = res.autonomy
        est = a.time
        err = abs(exact - est) if est is not None else None
        return TableRow(x0, y0, dx, exact, est, err, a.bracket, time.perf_counter() - t0,
                        "" if est is not None else "not reached within horizon")

    todo = [(tuple(inst), float(dx)) for inst in instances for dx in dx_list]
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            return list(pool.map(one, todo))
    return [one(job) for job in todo]


def format_table(rows) -> str:
    lines = [f"{'(x0,y0)':>12} {'dx':>6} {'eps':>8} {'s*':>9} {'T*':>9} {'time(s)':>8}"]
    for r in rows:
        eps = f"{r.error:.3f}" if r.error is not None else "n/a"
        est = f"{r.estimate:.4f}" if r.estimate is not None else "n/a"
        lines.append(f"{f'({r.x0:g},{r.y0:g})':>12} {r.dx:>6g} {eps:>8} {est:>9} {r.exact:>9.4f} {r.runtime:>8.1f}")
    return "\n".join(lines)
