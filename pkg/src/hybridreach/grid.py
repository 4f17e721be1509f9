"""Rectangular discretization of state x mode x lock, plus one-sided differences."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError
from .model import BallSet, BoxSet, HybridModel

# tolerance used when snapping float ratios to integer node counts
_SNAP = 1e-9


@dataclass
class Grid4D:
    """Grid over X x Q x P with explicit time step.

    Value fields are stored as arrays of shape ``(num_modes, num_p + 1, n_1, ..., n_d)``:
    mode-major, then lock level, then the state axes.
    """

    x_min: np.ndarray
    x_max: np.ndarray
    dx: float
    dp: float
    num_p: int
    num_modes: int
    horizon: float
    dt: float = math.nan
    axes: list = field(init=False, repr=False)

    def __post_init__(self):
        self.x_min = np.asarray(self.x_min, dtype=float)
        self.x_max = np.asarray(self.x_max, dtype=float)
        if not (self.dx > 0 and self.dp > 0):
            raise ContractError("grid spacings must be positive")
        counts = [int(math.floor((hi - lo) / self.dx + _SNAP)) + 1 for lo, hi in zip(self.x_min, self.x_max)]
        self.axes = [lo + self.dx * np.arange(n) for lo, n in zip(self.x_min, counts)]
        self.x_max = np.array([a[-1] for a in self.axes])

    @property
    def dim(self) -> int:
        return self.x_min.size

    @property
    def x_shape(self) -> tuple:
        return tuple(a.size for a in self.axes)

    @property
    def shape(self) -> tuple:
        return (self.num_modes, self.num_p + 1) + self.x_shape

    @property
    def p_levels(self) -> np.ndarray:
        return self.dp * np.arange(self.num_p + 1)

    @property
    def num_steps(self) -> int:
        if not self.dt > 0:
            raise ContractError("time step not set")
        return int(math.ceil(self.horizon / self.dt - _SNAP))

    def with_dt(self, dt: float) -> "Grid4D":
        if not dt > 0:
            raise ContractError("time step must be positive")
        g = Grid4D(self.x_min, self.x_max, self.dx, self.dp, self.num_p, self.num_modes, self.horizon, dt)
        return g

    def points(self) -> np.ndarray:
        """Node coordinates, shape ``x_shape + (d,)``."""
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack(mesh, axis=-1)

    def k_min(self, lag: float) -> int:
        """Smallest lock index whose level is at least ``lag``."""
        return int(math.ceil(lag / self.dp - _SNAP))

    def boundary_mask(self) -> np.ndarray:
        """True on the outermost ring of state nodes (Dirichlet nodes)."""
        mask = np.zeros(self.x_shape, dtype=bool)
        for j in range(self.dim):
            sl = [slice(None)] * self.dim
            sl[j] = 0
            mask[tuple(sl)] = True
            sl[j] = -1
            mask[tuple(sl)] = True
        return mask

    def flat_index(self, I, q: int, k: int) -> int:
        return int(np.ravel_multi_index((q, k) + tuple(I), self.shape))

    def unflat_index(self, flat: int):
        idx = np.unravel_index(flat, self.shape)
        return tuple(int(i) for i in idx[2:]), int(idx[0]), int(idx[1])

    def locate(self, x) -> tuple:
        """Nearest node multi-index of point ``x``."""
        x = np.asarray(x, dtype=float)
        idx = np.rint((x - self.x_min) / self.dx).astype(int)
        return tuple(int(i) for i in np.clip(idx, 0, np.array(self.x_shape) - 1))


def _outer_box(model: HybridModel):
    s = model.admissible_set
    if isinstance(s, BoxSet):
        return s.lower, s.upper
    if isinstance(s, BallSet):
        return s.center - s.radius, s.center + s.radius
    raise ContractError("computational box needs a box or ball admissible set; pass bounds explicitly")


def build_grid(model: HybridModel, dx: float, dp: float, horizon: float, margin: float = 0.1,
               bounds: tuple | None = None, p_max: float | None = None) -> Grid4D:
    """Grid covering K inflated by ``margin`` and lock levels up to ``lag + horizon``.

    ``p_max`` overrides the top of the lock axis.
    """
    if not (dx > 0 and dp > 0 and horizon > 0):
        raise ContractError("dx, dp and horizon must be positive")
    if margin < dx - _SNAP:
        raise ContractError(f"margin {margin} smaller than one cell {dx}")
    lo, hi = bounds if bounds is not None else _outer_box(model)
    lo = np.asarray(lo, dtype=float) - margin
    hi = np.asarray(hi, dtype=float) + margin
    counts = np.ceil((hi - lo) / dx - _SNAP).astype(int)
    hi = lo + counts * dx
    top = model.lag_delta + horizon if p_max is None else p_max
    num_p = int(math.ceil(top / dp - _SNAP))
    if p_max is None and num_p * dp < model.lag_delta + dp - _SNAP:
        raise ContractError("lock axis too short to represent the decision lag")
    return Grid4D(lo, hi, dx, dp, num_p, model.num_modes, horizon)


def upwind_gradients(field: np.ndarray, grid: Grid4D, I, q: int, k: int):
    """Backward and forward differences ``(D-, D+)`` at node ``(I, q, k)``."""
    I = tuple(int(i) for i in I)
    shape = grid.x_shape
    if len(I) != grid.dim or not (0 <= q < grid.num_modes and 0 <= k <= grid.num_p):
        raise IndexError(f"index {(I, q, k)} outside grid")
    for i, n in zip(I, shape):
        if not 1 <= i <= n - 2:
            raise IndexError(f"node {I} is not interior")
    center = field[(q, k) + I]
    dm = np.empty(grid.dim)
    dp = np.empty(grid.dim)
    for j in range(grid.dim):
        lo = list(I)
        hi = list(I)
        lo[j] -= 1
        hi[j] += 1
        dm[j] = (center - field[(q, k) + tuple(lo)]) / grid.dx
        dp[j] = (field[(q, k) + tuple(hi)] - center) / grid.dx
    return dm, dp


def slice_rows(grid: Grid4D, field2d: np.ndarray):
    """Rows ``(*coordinates, value)`` for a state-space slice, in C order."""
    pts = grid.points().reshape(-1, grid.dim)
    return np.column_stack([pts, np.asarray(field2d, dtype=float).reshape(-1)])
