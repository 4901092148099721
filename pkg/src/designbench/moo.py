"""NSGA-II over box-bounded real vectors, plus front comparison."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from designbench.core import DesignBenchError, DesignSpace, Direction, OptHistory, Problem, SimulationError
from designbench.metrics import KernelParams, PermutationResult, mmd2_permutation_test

Evaluator = Callable[[np.ndarray], np.ndarray]


class EvaluatorContractError(DesignBenchError):
    """The evaluator returned a batch of the wrong size or shape."""


def dominates(a: np.ndarray, b: np.ndarray) -> bool:
    return bool(np.all(a <= b) and np.any(a < b))


def fast_nondominated_sort(objs) -> np.ndarray:
    """Pareto rank of every row (0 = non-dominated), all objectives minimized."""
    F = np.asarray(objs, dtype=float)
    n = F.shape[0]
    if n == 0:
        return np.zeros(0, dtype=int)
    le = np.all(F[:, None, :] <= F[None, :, :], axis=2)
    lt = np.any(F[:, None, :] < F[None, :, :], axis=2)
    dom = le & lt  # dom[i, j]: i dominates j
    count = dom.sum(axis=0)
    ranks = np.full(n, -1, dtype=int)
    front = np.flatnonzero(count == 0)
    r = 0
    while front.size:
        ranks[front] = r
        count = count - dom[front].sum(axis=0)
        count[ranks >= 0] = -1
        front = np.flatnonzero(count == 0)
        r += 1
    return ranks


def crowding_distance(front) -> np.ndarray:
    """Crowding distance inside one front; extremes of every objective get ``inf``."""
    F = np.asarray(front, dtype=float)
    n, m = F.shape
    dist = np.zeros(n)
    if n <= 2:
        return np.full(n, np.inf)
    for k in range(m):
        order = np.argsort(F[:, k], kind="stable")
        col = F[order, k]
        dist[order[0]] = dist[order[-1]] = np.inf
        # failed members carry inf and get no interior distance from this objective
        if not (np.isfinite(col[0]) and np.isfinite(col[-1])) or col[-1] <= col[0]:
            continue
        span = col[-1] - col[0]
        dist[order[1:-1]] += (col[2:] - col[:-2]) / span
    return dist


def sbx(p1, p2, lo, hi, rng, eta: float = 15.0, prob: float = 0.9):
    """Bounded simulated binary crossover of two parents."""
    c1, c2 = p1.copy(), p2.copy()
    if rng.random() > prob:
        return c1, c2
    for i in range(p1.size):
        if rng.random() > 0.5 or abs(p1[i] - p2[i]) <= 1e-14:
            continue
        y1, y2 = min(p1[i], p2[i]), max(p1[i], p2[i])
        yl, yu = lo[i], hi[i]
        r = rng.random()
        out = []
        for beta in (1.0 + 2.0 * (y1 - yl) / (y2 - y1), 1.0 + 2.0 * (yu - y2) / (y2 - y1)):
            alpha = 2.0 - beta ** (-(eta + 1.0))
            if r <= 1.0 / alpha:
                bq = (r * alpha) ** (1.0 / (eta + 1.0))
            else:
                bq = (1.0 / (2.0 - r * alpha)) ** (1.0 / (eta + 1.0))
            out.append(bq)
        a = np.clip(0.5 * (y1 + y2 - out[0] * (y2 - y1)), yl, yu)
        b = np.clip(0.5 * (y1 + y2 + out[1] * (y2 - y1)), yl, yu)
        if rng.random() <= 0.5:
            a, b = b, a
        c1[i], c2[i] = a, b
    return c1, c2


def polynomial_mutation(x, lo, hi, rng, eta: float = 20.0, prob: float | None = None):
    y = x.copy()
    prob = 1.0 / x.size if prob is None else prob
    for i in range(x.size):
        if rng.random() > prob:
            continue
        span = hi[i] - lo[i]
        if span <= 0:
            continue
        d1, d2 = (y[i] - lo[i]) / span, (hi[i] - y[i]) / span
        r = rng.random()
        power = 1.0 / (eta + 1.0)
        if r < 0.5:
            val = 2.0 * r + (1.0 - 2.0 * r) * (1.0 - d1) ** (eta + 1.0)
            dq = val**power - 1.0
        else:
            val = 2.0 * (1.0 - r) + 2.0 * (r - 0.5) * (1.0 - d2) ** (eta + 1.0)
            dq = 1.0 - val**power
        y[i] = np.clip(y[i] + dq * span, lo[i], hi[i])
    return y


@dataclass
class NSGA2Result:
    pareto_set: np.ndarray
    pareto_front: np.ndarray
    population: np.ndarray
    objectives: np.ndarray
    history: OptHistory
    n_failed: int = 0
    fronts: list[np.ndarray] = field(default_factory=list)


def _evaluate(evaluator: Evaluator, X: np.ndarray) -> np.ndarray:
    out = evaluator(X)
    if out is None or len(out) != len(X):
        raise EvaluatorContractError(f"evaluator returned {0 if out is None else len(out)} rows for {len(X)} designs")
    rows = [None if r is None else np.atleast_1d(np.asarray(r, dtype=float)) for r in out]
    sizes = {r.size for r in rows if r is not None}
    if len(sizes) > 1:
        raise EvaluatorContractError("evaluator rows differ in length")
    F = np.full((len(X), sizes.pop() if sizes else 1), np.inf)
    for i, r in enumerate(rows):
        if r is not None and np.all(np.isfinite(r)):
            F[i] = r
    return F


def _rank_and_crowd(F: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    ranks = fast_nondominated_sort(F)
    crowd = np.zeros(len(F))
    for r in np.unique(ranks):
        idx = np.flatnonzero(ranks == r)
        crowd[idx] = crowding_distance(F[idx])
    return ranks, crowd


def _tournament(ranks, crowd, rng) -> int:
    i, j = rng.integers(len(ranks), size=2)
    if ranks[i] != ranks[j]:
        return int(i if ranks[i] < ranks[j] else j)
    if crowd[i] != crowd[j]:
        return int(i if crowd[i] > crowd[j] else j)
    return int(i if rng.random() < 0.5 else j)


def _survivors(F: np.ndarray, size: int) -> np.ndarray:
    ranks, crowd = _rank_and_crowd(F)
    chosen = []
    for r in np.unique(ranks):
        idx = np.flatnonzero(ranks == r)
        if len(chosen) + idx.size <= size:
            chosen.extend(idx)
        else:
            order = idx[np.argsort(-crowd[idx], kind="stable")]
            chosen.extend(order[: size - len(chosen)])
            break
    return np.array(chosen, dtype=int)


def nsga2(evaluator: Evaluator, space: DesignSpace, pop_size: int = 100, generations: int = 100,
          seed: int | None = 0, start: np.ndarray | None = None, eta_c: float = 15.0, p_c: float = 0.9,
          eta_m: float = 20.0, p_m: float | None = None) -> NSGA2Result:
    """Minimize every objective returned by ``evaluator`` (batch in, batch out).

    Rows that are non-finite or ``None`` count as failed evaluations; they
    get ``+inf`` objectives and never appear in the returned front.
    """
    if pop_size < 2 or pop_size % 2:
        raise ValueError("pop_size must be even and >= 2")
    if generations < 1:
        raise ValueError("generations must be >= 1")
    rng = np.random.default_rng(seed)
    lo = np.broadcast_to(space.lower, space.shape).ravel().astype(float)
    hi = np.broadcast_to(space.upper, space.shape).ravel().astype(float)
    X = lo + rng.random((pop_size, lo.size)) * (hi - lo)
    if start is not None:
        seeds = np.atleast_2d(np.asarray(start, dtype=float))[:pop_size]
        X[: len(seeds)] = np.clip(seeds.reshape(len(seeds), -1), lo, hi)
    F = _evaluate(evaluator, X)
    failed = int(np.sum(~np.all(np.isfinite(F), axis=1)))
    history = OptHistory()
    fronts = []
    for _ in range(generations):
        ranks, crowd = _rank_and_crowd(F)
        children = []
        while len(children) < pop_size:
            a = X[_tournament(ranks, crowd, rng)]
            b = X[_tournament(ranks, crowd, rng)]
            c1, c2 = sbx(a, b, lo, hi, rng, eta_c, p_c)
            children += [polynomial_mutation(c1, lo, hi, rng, eta_m, p_m),
                         polynomial_mutation(c2, lo, hi, rng, eta_m, p_m)]
        Xc = np.array(children[:pop_size])
        Fc = _evaluate(evaluator, Xc)
        failed += int(np.sum(~np.all(np.isfinite(Fc), axis=1)))
        Xa, Fa = np.vstack([X, Xc]), np.vstack([F, Fc])
        keep = _survivors(Fa, pop_size)
        X, F = Xa[keep], Fa[keep]
        front = _front(X, F)[1]
        fronts.append(front)
        history.append(front.min(axis=0) if len(front) else np.full(F.shape[1], np.inf), front_size=len(front))
    pset, pfront = _front(X, F)
    history.converged = True
    history.final_variables = pset
    return NSGA2Result(pset.reshape((-1,) + tuple(space.shape)), pfront, X, F, history, failed, fronts)


def _front(X, F):
    ok = np.all(np.isfinite(F), axis=1)
    Xo, Fo = X[ok], F[ok]
    if not len(Fo):
        return Xo, Fo
    rank0 = fast_nondominated_sort(Fo) == 0
    Xf, Ff = Xo[rank0], Fo[rank0]
    # drop exact duplicates, keep the first occurrence, sort by objectives for a canonical order
    _, first = np.unique(np.hstack([Ff, Xf]), axis=0, return_index=True)
    first = np.sort(first)
    Xf, Ff = Xf[first], Ff[first]
    order = np.lexsort(Ff.T[::-1])
    return Xf[order], Ff[order]


class ProblemEvaluator:
    """Batch evaluator over ``problem.simulate``, with every objective turned into a minimization."""

    def __init__(self, problem: Problem, conds: Mapping[str, float] | None = None):
        self.problem = problem
        self.conds = conds
        self.signs = np.array([1.0 if d is Direction.MINIMIZE else -1.0 for _, d in problem.objectives])
        self.failures: list[str] = []

    def __call__(self, X: np.ndarray) -> list:
        shape = self.problem.design_space.shape
        out = []
        for x in X:
            try:
                out.append(self.signs * self.problem.simulate(np.reshape(x, shape), self.conds))
            except SimulationError as exc:
                self.failures.append(str(exc))
                out.append(None)
        return out


def nsga2_problem(problem: Problem, conds=None, pop_size: int = 20, generations: int = 10, seed: int | None = 0,
                  start=None, **kw) -> tuple[np.ndarray, OptHistory]:
    """Run NSGA-II on a registered problem; returns the Pareto set and a history.

    The history's ``extra["pareto_front"]`` holds the final front in the
    problem's own objective directions.
    """
    ev = ProblemEvaluator(problem, conds)
    res = nsga2(ev, problem.design_space, pop_size, generations, seed, start, **kw)
    hist = res.history
    hist.extra["pareto_front"] = [row * ev.signs for row in res.pareto_front]
    hist.extra["n_failed"] = [res.n_failed]
    return res.pareto_set, hist


def compare_fronts(front_a, front_b, kp: KernelParams | None = None, n_perms: int = 1000,
                   seed: int | None = 0) -> PermutationResult:
    """MMD^2 permutation test between two sets of objective vectors."""
    a, b = np.atleast_2d(np.asarray(front_a, float)), np.atleast_2d(np.asarray(front_b, float))
    if not len(a) or not len(b):
        raise ValueError("fronts must be non-empty")
    return mmd2_permutation_test(a, b, kp, n_perms, seed)
