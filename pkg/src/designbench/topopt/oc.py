"""Optimality-criteria density update."""
from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np

_EPS = np.finfo(float).eps


class OCStep(NamedTuple):
    x: np.ndarray
    x_phys: np.ndarray
    multiplier: float
    bisections: int
    hit_precision_guard: bool


def oc_step(x: np.ndarray, dc: np.ndarray, dv: np.ndarray, volfrac: float, move: float = 0.2,
            to_physical: Callable[[np.ndarray], np.ndarray] | None = None,
            damping: float = 0.5, lam_hi: float = 1e9, vol_tol: float = 1e-9,
            max_bisections: int = 10_000) -> OCStep:
    """Bisect the volume multiplier and return the updated design.

    The loop stops when the physical volume matches ``volfrac`` to
    ``vol_tol``, when the multiplier bracket is narrower than machine
    precision (absolute or relative), or after ``max_bisections``.  The guard
    matters when the volume cannot be met (e.g. flat sensitivities) and the
    bracket collapses towards zero.
    """
    to_physical = to_physical or (lambda v: v)
    ratio = np.maximum(-dc, 0.0) / dv
    lo, hi = 0.0, lam_hi
    guard = False
    count = 0
    x_new = x_phys = x
    lam = hi
    while count < max_bisections:
        if hi - lo <= _EPS or (hi - lo) <= _EPS * (hi + lo):
            guard = True
            break
        lam = 0.5 * (lo + hi)
        count += 1
        x_new = np.clip(x * (ratio / lam) ** damping, np.maximum(x - move, 0.0), np.minimum(x + move, 1.0))
        x_phys = to_physical(x_new)
        excess = x_phys.mean() - volfrac
        if abs(excess) <= vol_tol:
            break
        if excess > 0:
            lo = lam
        else:
            hi = lam
    return OCStep(x_new, x_phys, lam, count, guard)


def oc_update(x, dc, dv, volfrac: float, move: float = 0.2, to_physical=None) -> np.ndarray:
    """Return the OC-updated design variables (see :func:`oc_step`)."""
    return oc_step(np.asarray(x, dtype=float), np.asarray(dc, dtype=float), np.asarray(dv, dtype=float),
                   volfrac, move, to_physical).x
