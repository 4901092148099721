"""Distribution, diversity, optimality and feasibility metrics for generated designs.

Designs are flattened row-major before any kernel computation.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy.spatial.distance import cdist, pdist

from designbench.core import Category, DesignBenchError, Direction, OptHistory, Problem


class MetricInputError(DesignBenchError, ValueError):
    pass


class Bandwidth(str, enum.Enum):
    FIXED = "Fixed"
    MEDIAN = "MedianHeuristic"


@dataclass(frozen=True)
class KernelParams:
    """Gaussian kernel ``exp(-|a - b|^2 / (2 sigma^2))``."""

    sigma: float = 1.0
    selection: Bandwidth = Bandwidth.MEDIAN

    def resolve(self, pooled: np.ndarray) -> float:
        if self.selection is Bandwidth.FIXED:
            if self.sigma <= 0:
                raise MetricInputError("sigma must be positive")
            return float(self.sigma)
        return median_bandwidth(pooled)


def as_samples(samples) -> np.ndarray:
    """Stack designs into an ``(n, d)`` float array."""
    if isinstance(samples, np.ndarray) and samples.ndim == 2:
        arr = samples.astype(float)
    else:
        rows = [np.asarray(s, dtype=float).ravel() for s in samples]
        if not rows:
            raise MetricInputError("sample set is empty")
        if len({r.size for r in rows}) != 1:
            raise MetricInputError("samples have different dimensions")
        arr = np.vstack(rows)
    if arr.shape[0] == 0:
        raise MetricInputError("sample set is empty")
    return arr


def median_bandwidth(pooled: np.ndarray) -> float:
    """Median pairwise distance; 1.0 when all points coincide or there is only one."""
    if pooled.shape[0] < 2:
        return 1.0
    med = float(np.median(pdist(pooled)))
    return med if med > 0 else 1.0


def gaussian_gram(a: np.ndarray, b: np.ndarray, sigma: float) -> np.ndarray:
    return np.exp(-cdist(a, b, "sqeuclidean") / (2.0 * sigma**2))


def _exact_sum(values: np.ndarray) -> float:
    # fsum is exactly rounded, so the result does not depend on summation order
    return math.fsum(values.ravel())


def _fast_sum(values: np.ndarray) -> float:
    return float(np.sum(values))


def _mmd2_from_gram(kxx: np.ndarray, kyy: np.ndarray, kxy: np.ndarray, unbiased: bool, total=_exact_sum) -> float:
    m, n = kxx.shape[0], kyy.shape[0]
    if unbiased:
        if m < 2 or n < 2:
            raise MetricInputError("unbiased MMD^2 needs at least two samples per set")
        sxx = (total(kxx) - total(np.diag(kxx))) / (m * (m - 1))
        syy = (total(kyy) - total(np.diag(kyy))) / (n * (n - 1))
    else:
        sxx, syy = total(kxx) / kxx.size, total(kyy) / kyy.size
    lo, hi = sorted((sxx, syy))
    return lo + hi - 2.0 * total(kxy) / kxy.size


def mmd2(d_real, d_gen, kp: KernelParams | None = None, unbiased: bool = True) -> float:
    """Squared maximum mean discrepancy between two sample sets (Gaussian kernel)."""
    x, y = as_samples(d_real), as_samples(d_gen)
    if x.shape[1] != y.shape[1]:
        raise MetricInputError(f"dimension mismatch: {x.shape[1]} vs {y.shape[1]}")
    sigma = (kp or KernelParams()).resolve(np.vstack([x, y]))
    return _mmd2_from_gram(gaussian_gram(x, x, sigma), gaussian_gram(y, y, sigma), gaussian_gram(x, y, sigma),
                           unbiased)


class PermutationResult(NamedTuple):
    statistic: float
    p_value: float


def mmd2_permutation_test(d_real, d_gen, kp: KernelParams | None = None, n_perms: int = 1000,
                          seed: int | None = 0, unbiased: bool = True) -> PermutationResult:
    """Two-sample test with ``p = (1 + #{permuted >= observed}) / (1 + n_perms)``.

    The bandwidth is fixed from the pooled set once, so every permutation
    uses the same kernel.
    """
    if n_perms < 1:
        raise MetricInputError("n_perms must be >= 1")
    x, y = as_samples(d_real), as_samples(d_gen)
    if x.shape[1] != y.shape[1]:
        raise MetricInputError(f"dimension mismatch: {x.shape[1]} vs {y.shape[1]}")
    pooled = np.vstack([x, y])
    sigma = (kp or KernelParams()).resolve(pooled)
    K = gaussian_gram(pooled, pooled, sigma)
    m = x.shape[0]

    def stat(idx, total=_fast_sum):
        a, b = idx[:m], idx[m:]
        return _mmd2_from_gram(K[np.ix_(a, a)], K[np.ix_(b, b)], K[np.ix_(a, b)], unbiased, total)

    ident = np.arange(pooled.shape[0])
    # permutations are ranked with the fast sum against the same route; the
    # reported statistic uses the exact sum so swapping the sets gives the same value
    observed = stat(ident)
    rng = np.random.default_rng(seed)
    hits = sum(stat(rng.permutation(ident)) >= observed for _ in range(n_perms))
    return PermutationResult(stat(ident, _exact_sum), (1 + hits) / (1 + n_perms))


class DPPResult(NamedTuple):
    det: float
    logdet: float


def dpp_diversity(d_gen, kp: KernelParams | None = None) -> DPPResult:
    """Determinant of the Gaussian Gram matrix (unit diagonal, so in ``[0, 1]``)."""
    x = as_samples(d_gen)
    sigma = (kp or KernelParams()).resolve(x)
    K = gaussian_gram(x, x, sigma)
    try:
        L = np.linalg.cholesky(K)
        logdet = 2.0 * float(np.sum(np.log(np.diag(L))))
    except np.linalg.LinAlgError:
        sign, logdet = np.linalg.slogdet(K)
        if sign <= 0:
            return DPPResult(0.0, -math.inf)
    return DPPResult(min(math.exp(logdet), 1.0), logdet)


def cog(history: OptHistory | Sequence[float], f_star: float,
        direction: Direction = Direction.MINIMIZE, objective: int = 0) -> float:
    """Cumulative optimality gap of a trajectory against the best known value ``f_star``."""
    if isinstance(history, OptHistory):
        values = history.objective_array()[:, objective] if history.iterations else np.zeros(0)
    else:
        values = np.asarray(history, dtype=float).ravel()
    if values.size == 0:
        raise MetricInputError("empty trajectory")
    if not math.isfinite(f_star):
        raise MetricInputError("f_star must be finite")
    gaps = values - f_star if direction is Direction.MINIMIZE else f_star - values
    return math.fsum(gaps)


def violates_theory(problem: Problem, design, conds=None) -> bool:
    return any(v.category is Category.THEORY for v in problem.check_constraints(design, conds))


def rvc(problem: Problem, designs: Iterable, conds: Iterable | None = None) -> float:
    """Fraction of ``(design, conditions)`` pairs with at least one Theory-category finding."""
    designs = list(designs)
    conds = [None] * len(designs) if conds is None else list(conds)
    if len(conds) != len(designs):
        raise MetricInputError("designs and conditions differ in length")
    if not designs:
        raise MetricInputError("nothing to evaluate")
    return sum(violates_theory(problem, d, c) for d, c in zip(designs, conds)) / len(designs)


def rf(failed: Iterable[bool]) -> float:
    """Fraction of failed simulations; entries are ``True`` for a failure."""
    outcomes = [bool(f) for f in failed]
    if not outcomes:
        raise MetricInputError("no simulation outcomes")
    return sum(outcomes) / len(outcomes)
