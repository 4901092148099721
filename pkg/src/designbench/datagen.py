"""Sampling plans, dataset splits, JSONL serialization and parallel dataset generation."""
from __future__ import annotations

import concurrent.futures as cf
import enum
import hashlib
import itertools
import json
import math
import multiprocessing
import os
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from designbench.core import DesignBenchError, Problem


class DatasetError(DesignBenchError):
    def __init__(self, message: str, manifest: dict | None = None):
        super().__init__(message)
        self.manifest = manifest


class PlanKind(str, enum.Enum):
    GRID = "Grid"
    RANDOM = "Random"
    LHS = "LHS"
    CORNERS = "Corners"


class Split(str, enum.Enum):
    TRAIN = "train"
    VAL = "val"
    TEST = "test"


@dataclass(frozen=True)
class Dimension:
    """One sampled parameter.

    ``levels`` lists explicit values (used by Grid and Corners).  Without
    them both use ``n_levels`` evenly spaced values over the bounds; the
    default of two levels makes a Corners dimension take just its bounds.
    ``strata`` overrides the LHS stratum count.
    """

    name: str
    lower: float = 0.0
    upper: float = 1.0
    levels: tuple[float, ...] | None = None
    n_levels: int = 2
    include_endpoints: bool = True
    strata: int | None = None

    def __post_init__(self):
        if self.upper < self.lower:
            raise ValueError(f"{self.name}: upper < lower")
        if self.levels is not None:
            object.__setattr__(self, "levels", tuple(float(v) for v in self.levels))
            if not self.levels:
                raise ValueError(f"{self.name}: empty level list")
        elif self.n_levels < 1:
            raise ValueError(f"{self.name}: need at least one level")

    def grid_levels(self) -> tuple[float, ...]:
        if self.levels is not None:
            return self.levels
        if self.n_levels == 1:
            return (0.5 * (self.lower + self.upper),)
        return tuple(float(v) for v in np.linspace(self.lower, self.upper, self.n_levels))

    def corner_levels(self) -> tuple[float, ...]:
        return self.grid_levels()

    def to_dict(self) -> dict:
        return {"name": self.name, "lower": self.lower, "upper": self.upper,
                "levels": list(self.levels) if self.levels is not None else None,
                "n_levels": self.n_levels, "include_endpoints": self.include_endpoints, "strata": self.strata}


@dataclass(frozen=True)
class SamplingPlan:
    kind: PlanKind
    dims: tuple[Dimension, ...]
    count: int = 0  # Random and LHS only
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", PlanKind(self.kind))
        object.__setattr__(self, "dims", tuple(self.dims))
        if not self.dims:
            raise ValueError("plan has no dimensions")
        if self.kind in (PlanKind.RANDOM, PlanKind.LHS) and self.count < 1:
            raise ValueError(f"{self.kind.value} plan needs count >= 1")

    @property
    def names(self) -> list[str]:
        return [d.name for d in self.dims]

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "count": self.count, "seed": self.seed,
                "dims": [d.to_dict() for d in self.dims]}


def _open_uniform(rng, lo, hi, size):
    u = rng.random(size)
    while np.any(u == 0.0):  # exclude the lower endpoint; random() never returns 1
        u[u == 0.0] = rng.random(int(np.sum(u == 0.0)))
    return lo + u * (hi - lo)


def sample(plan: SamplingPlan) -> list[dict[str, float]]:
    """Points of ``plan`` as ``name -> value`` dicts, in a deterministic order."""
    names = plan.names
    if plan.kind is PlanKind.GRID:
        rows = itertools.product(*(d.grid_levels() for d in plan.dims))
    elif plan.kind is PlanKind.CORNERS:
        rows = itertools.product(*(d.corner_levels() for d in plan.dims))
    else:
        rng = np.random.default_rng(plan.seed)
        cols = []
        for d in plan.dims:
            if plan.kind is PlanKind.RANDOM:
                u = _open_uniform(rng, 0.0, 1.0, plan.count) if not d.include_endpoints else rng.random(plan.count)
            else:
                strata = d.strata or plan.count
                cells = rng.permutation(np.arange(plan.count) % strata)
                u = (cells + _open_uniform(rng, 0.0, 1.0, plan.count)) / strata
            cols.append(d.lower + u * (d.upper - d.lower))
        rows = zip(*cols)
    return [{n: float(v) for n, v in zip(names, row)} for row in rows]


# ---------------------------------------------------------------------------
# Records
# ---------------------------------------------------------------------------


@dataclass
class DatasetRecord:
    index: int
    conditions: dict[str, float]
    design: np.ndarray | None
    objectives: dict[str, float] | None
    split: Split = Split.TRAIN
    seed: int = 0
    failure: str | None = None
    history: list[list[float]] | None = None

    @property
    def failed(self) -> bool:
        return self.objectives is None

    def key(self) -> tuple:
        return tuple(self.conditions[k] for k in sorted(self.conditions)), self.index

    def to_dict(self) -> dict:
        design = None
        if self.design is not None:
            design = {"shape": list(self.design.shape), "data": [float(v) for v in self.design.ravel()]}
        return {"index": self.index, "conditions": self.conditions, "design": design,
                "objectives": self.objectives, "split": self.split.value, "seed": self.seed,
                "failure": self.failure, "history": self.history}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "DatasetRecord":
        design = d.get("design")
        if design is not None:
            design = np.asarray(design["data"], dtype=float).reshape(design["shape"])
        objectives = d.get("objectives")
        if objectives is not None:
            objectives = {k: float(v) for k, v in objectives.items()}
        history = d.get("history")
        if history is not None:
            history = [[float(v) for v in row] for row in history]
        return cls(int(d["index"]), {k: float(v) for k, v in d["conditions"].items()}, design, objectives,
                   Split(d["split"]), int(d["seed"]), d.get("failure"), history)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DatasetRecord):
            return NotImplemented
        same_design = (self.design is None and other.design is None) or (
            self.design is not None and other.design is not None and np.array_equal(self.design, other.design)
            and self.design.shape == other.design.shape)
        return same_design and self.to_dict() == other.to_dict()


def _json(obj) -> str:
    """JSON text with floats written to 17 significant digits."""
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "NaN"
        if math.isinf(v):
            return "Infinity" if v > 0 else "-Infinity"
        text = "%.17g" % v
        return text if any(c in text for c in ".eEn") else text + ".0"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, Mapping):
        return "{" + ",".join(f"{json.dumps(str(k))}:{_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ",".join(_json(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_records(records: Iterable[DatasetRecord]) -> str:
    return "".join(_json(r.to_dict()) + "\n" for r in sorted(records, key=DatasetRecord.key))


def write_jsonl(records: Iterable[DatasetRecord], path) -> str:
    text = dumps_records(records)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def read_jsonl(path) -> list[DatasetRecord]:
    with open(path, encoding="utf-8") as fh:
        return [DatasetRecord.from_dict(json.loads(line)) for line in fh if line.strip()]


# ---------------------------------------------------------------------------
# Splits
# ---------------------------------------------------------------------------


def split(records: Sequence[DatasetRecord], ratios: Sequence[float] = (0.7, 0.2, 0.1),
          seed: int = 0) -> list[DatasetRecord]:
    """Shuffle and tag records train/val/test; sizes are ``round(r * N)`` with test taking the rest."""
    if len(ratios) != 3 or min(ratios) < 0 or abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError("ratios must be three non-negative numbers summing to 1")
    n = len(records)
    n_train = int(round(ratios[0] * n))
    n_val = min(int(round(ratios[1] * n)), n - n_train)
    order = np.random.default_rng(seed).permutation(n)
    tags = np.empty(n, dtype=object)
    tags[order[:n_train]] = Split.TRAIN
    tags[order[n_train:n_train + n_val]] = Split.VAL
    tags[order[n_train + n_val:]] = Split.TEST
    for rec, tag in zip(records, tags):
        rec.split = tag
    return list(records)


def split_holdout(records: Sequence[DatasetRecord], holdout: Mapping[str, Iterable[float]],
                  seed: int = 0) -> list[DatasetRecord]:
    """Keep every record using a held-out condition value out of train.

    Held-out records are shuffled and divided evenly between val and test.
    """
    held = {k: {float(v) for v in vals} for k, vals in holdout.items()}
    out = [r for r in records if any(r.conditions.get(k) in vals for k, vals in held.items())]
    for r in records:
        r.split = Split.TRAIN
    order = np.random.default_rng(seed).permutation(len(out))
    half = (len(out) + 1) // 2
    for rank, i in enumerate(order):
        out[i].split = Split.VAL if rank < half else Split.TEST
    return list(records)


# ---------------------------------------------------------------------------
# Generation
# ---------------------------------------------------------------------------


@dataclass
class Job:
    index: int
    point: dict[str, float]
    seed: int


@dataclass
class GenerateOptions:
    mode: str = "auto"  # "optimize", "simulate" or "auto"
    ratios: tuple[float, float, float] = (0.7, 0.2, 0.1)
    holdout: dict[str, list[float]] | None = None
    split_seed: int = 0
    store_history: bool = True
    optimize_options: dict[str, Any] = field(default_factory=dict)


def job_seed(base: int, index: int) -> int:
    return int(np.random.SeedSequence([int(base), int(index)]).generate_state(1)[0])


def _resolve_mode(problem: Problem, plan: SamplingPlan, mode: str) -> str:
    if mode != "auto":
        return mode
    if set(plan.names) <= set(problem.conditions_keys):
        return "optimize"
    return "simulate"


def _run_job(cls, config, job: Job, mode: str, store_history: bool, optimize_options) -> DatasetRecord:
    problem = cls(job.seed, **config)
    names = problem.objectives_keys
    try:
        if mode == "optimize":
            conds = problem.merge_conditions(job.point)
            design, hist = problem.optimize(None, conds, **optimize_options)
            design = np.asarray(design, dtype=float)
            objectives = problem.simulate(design, conds)
            history = [[float(v) for v in row] for row in hist.objective_values] if store_history else None
            return DatasetRecord(job.index, conds, design, dict(zip(names, map(float, objectives))),
                                 seed=job.seed, history=history)
        design = np.array([job.point[k] for k in job.point], dtype=float).reshape(problem.design_space.shape)
        conds = problem.merge_conditions(None)
        objectives = problem.simulate(design, conds)
        return DatasetRecord(job.index, conds, design, dict(zip(names, map(float, objectives))), seed=job.seed)
    except DesignBenchError as exc:
        conds = problem.merge_conditions(job.point if mode == "optimize" else None)
        return DatasetRecord(job.index, conds, None, None, seed=job.seed, failure=f"{type(exc).__name__}: {exc}")


def dataset_stem(problem_id: str) -> str:
    return problem_id.replace("/", "_")


def generate(problem: Problem, plan: SamplingPlan, parallelism: int = 1, out_dir=".",
             options: GenerateOptions | None = None) -> dict:
    """Run every plan point and write ``<id>.jsonl`` plus ``<id>.manifest.json`` under ``out_dir``.

    Returns the manifest.  Records are sorted by their condition tuple, so
    the files do not depend on ``parallelism``.
    """
    options = options or GenerateOptions()
    mode = _resolve_mode(problem, plan, options.mode)
    points = sample(plan)
    jobs = [Job(i, p, job_seed(plan.seed, i)) for i, p in enumerate(points)]
    cls, config = type(problem), dict(problem.config)
    args = (mode, options.store_history, options.optimize_options)
    if parallelism <= 1 or len(jobs) <= 1:
        records = [_run_job(cls, config, j, *args) for j in jobs]
    else:
        ctx = multiprocessing.get_context("fork")
        with cf.ProcessPoolExecutor(max_workers=parallelism, mp_context=ctx) as pool:
            records = list(pool.map(_run_job, [cls] * len(jobs), [config] * len(jobs), jobs,
                                    *[[a] * len(jobs) for a in args]))
    if options.holdout:
        split_holdout(records, options.holdout, options.split_seed)
    else:
        split(records, options.ratios, options.split_seed)

    os.makedirs(out_dir, exist_ok=True)
    stem = dataset_stem(problem.problem_id)
    data_path = os.path.join(out_dir, stem + ".jsonl")
    digest = write_jsonl(records, data_path)
    failures = [r for r in records if r.failed]
    manifest = {
        "problem_id": problem.problem_id,
        "version": problem.version,
        "mode": mode,
        "config": {k: v for k, v in config.items() if isinstance(v, (int, float, str, bool, type(None)))},
        "plan": plan.to_dict(),
        "split": {"holdout": options.holdout, "ratios": list(options.ratios), "seed": options.split_seed},
        "optimize_options": options.optimize_options,
        "counts": {
            "total": len(records),
            "failures": len(failures),
            **{s.value: sum(r.split is s for r in records) for s in Split},
        },
        "rf": len(failures) / len(records) if records else 0.0,
        "seeds": [r.seed for r in sorted(records, key=lambda r: r.index)],
        "data_file": os.path.basename(data_path),
        "content_sha256": digest,
    }
    with open(os.path.join(out_dir, stem + ".manifest.json"), "w", encoding="utf-8") as fh:
        fh.write(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    if records and len(failures) == len(records):
        raise DatasetError(f"all {len(records)} points failed; first: {failures[0].failure}", manifest)
    return manifest
