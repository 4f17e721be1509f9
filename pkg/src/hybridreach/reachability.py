"""Level-set readout: reachable masks, per-mode minimum maps and autonomy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def min_value_maps(field: np.ndarray) -> np.ndarray:
    """Minimum over lock levels for each mode; shape ``(num_modes, *x_shape)``."""
    return field.min(axis=1)


def reachable_mask(field: np.ndarray, in_k: np.ndarray, tol: float = 0.0) -> np.ndarray:
    """Nodes of K where some ``(q, p)`` has value ``<= tol``."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    return in_k & (field.min(axis=(0, 1)) <= tol)


@dataclass(frozen=True)
class Autonomy:
    """First time the reachable mask is empty, with the bracketing step times.

    ``time`` is None when the mask never empties within the horizon.
    """

    time: float | None
    bracket: tuple | None
    step: int | None

    @property
    def reached(self) -> bool:
        return self.time is not None

    def __str__(self):
        if not self.reached:
            return "not reached within horizon"
        return f"{self.time:.6f} (bracket [{self.bracket[0]:.6f}, {self.bracket[1]:.6f}])"


def autonomy_from_masks(times, empties) -> Autonomy:
    prev = None
    for n, (t, empty) in enumerate(zip(times, empties)):
        if empty:
            lo = t if prev is None else prev
            return Autonomy(float(t), (float(lo), float(t)), n)
        prev = t
    return Autonomy(None, None, None)


def autonomy(result) -> Autonomy:
    """Autonomy estimate of a solve: first step time with an empty mask."""
    return autonomy_from_masks([r.time for r in result.records], [r.empty for r in result.records])
