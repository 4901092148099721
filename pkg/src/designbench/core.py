"""Problem abstraction shared by every simulator.

A problem bundles a design space, objective directions, default conditions,
a table of range/relation checks and (optionally) an optimizer.  Checks never
raise: they return :class:`Violation` records and the caller decides whether
an ``error`` blocks simulation (``strict=True``).
"""
from __future__ import annotations

import abc
import enum
import math
from dataclasses import dataclass, field
from typing import Any, Callable, ClassVar, Iterable, Mapping, Sequence

import numpy as np


class DesignBenchError(Exception):
    """Base class for errors raised by this package."""


class UnknownConditionError(DesignBenchError, KeyError):
    """A condition name is not declared by the problem."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class ConstraintError(DesignBenchError):
    """Raised in strict mode when an error-severity violation exists."""

    def __init__(self, violations: Sequence["Violation"]):
        self.violations = list(violations)
        super().__init__("; ".join(v.message for v in self.violations))


class SimulationError(DesignBenchError):
    """A simulator failed; ``partial`` may hold an incomplete history."""

    def __init__(self, message: str, partial: "OptHistory | None" = None):
        super().__init__(message)
        self.partial = partial


class SingularSystemError(SimulationError):
    """A linear system has no unique solution (e.g. missing supports)."""


class RegistryError(DesignBenchError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class Direction(enum.Enum):
    MINIMIZE = "MINIMIZE"
    MAXIMIZE = "MAXIMIZE"

    @property
    def sign(self) -> float:
        """Multiplier turning the objective into a minimization target."""
        return 1.0 if self is Direction.MINIMIZE else -1.0


class Category(enum.Enum):
    THEORY = "Theory"
    IMPLEMENTATION = "Implementation"


class Severity(enum.Enum):
    ERROR = "error"
    WARNING = "warning"


class SpaceKind(enum.Enum):
    CONTINUOUS = "Continuous"
    DISCRETE = "Discrete"
    MIXED = "Mixed"


# ---------------------------------------------------------------------------
# Design space and metadata
# ---------------------------------------------------------------------------


class DesignSpace:
    """Axis-aligned box of designs.

    Bounds may be scalars (broadcast over ``shape``) or arrays of the full
    shape.
    """

    def __init__(self, lower, upper, shape: Sequence[int], kind: SpaceKind = SpaceKind.CONTINUOUS):
        self.shape = tuple(int(s) for s in shape)
        self.kind = kind
        lo = np.asarray(lower, dtype=float)
        hi = np.asarray(upper, dtype=float)
        self._scalar = lo.ndim == 0 and hi.ndim == 0
        self.lower = np.broadcast_to(lo, self.shape).copy()
        self.upper = np.broadcast_to(hi, self.shape).copy()
        if np.any(self.lower > self.upper):
            raise ValueError("lower bound exceeds upper bound")
        self.lower.setflags(write=False)
        self.upper.setflags(write=False)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def contains(self, design) -> bool:
        x = np.asarray(design, dtype=float)
        return x.shape == self.shape and bool(np.all((x >= self.lower) & (x <= self.upper)))

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        u = rng.random(self.shape)
        return self.lower + u * (self.upper - self.lower)

    def clip(self, design) -> np.ndarray:
        return np.clip(np.asarray(design, dtype=float), self.lower, self.upper)

    def __repr__(self) -> str:
        if self._scalar:
            lo, hi = float(self.lower.flat[0]), float(self.upper.flat[0])
        else:
            lo, hi = self.lower.min(), self.upper.max()
        return f"Box({lo}, {hi}, {self.shape}, float64)"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, DesignSpace)
            and self.shape == other.shape
            and np.array_equal(self.lower, other.lower)
            and np.array_equal(self.upper, other.upper)
        )


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    version: int
    design_space: DesignSpace
    objectives: tuple[tuple[str, Direction], ...]
    conditions: tuple[tuple[str, float], ...]
    dataset_path: str | None = None

    def __post_init__(self):
        if self.version < 0:
            raise ValueError("version must be non-negative")
        for label, names in (("objective", self.objective_names), ("condition", self.condition_names)):
            if len(set(names)) != len(names):
                raise ValueError(f"duplicate {label} names: {names}")

    @property
    def problem_id(self) -> str:
        return f"{self.name}/v{self.version}"

    @property
    def objective_names(self) -> list[str]:
        return [name for name, _ in self.objectives]

    @property
    def condition_names(self) -> list[str]:
        return [name for name, _ in self.conditions]

    def default_conditions(self) -> dict[str, float]:
        return dict(self.conditions)


@dataclass
class OptHistory:
    """Per-iteration record of an optimizer run."""

    objective_values: list[np.ndarray] = field(default_factory=list)
    designs: list[np.ndarray] | None = None
    converged: bool = False
    extra: dict[str, list] = field(default_factory=dict)
    final_variables: np.ndarray | None = None

    @property
    def iterations(self) -> int:
        return len(self.objective_values)

    def append(self, objectives, design=None, **extra) -> None:
        self.objective_values.append(np.atleast_1d(np.asarray(objectives, dtype=float)).copy())
        if self.designs is not None and design is not None:
            self.designs.append(np.array(design, copy=True))
        for key, value in extra.items():
            self.extra.setdefault(key, []).append(value)

    def objective_array(self) -> np.ndarray:
        """History as an ``(iterations, n_objectives)`` array."""
        if not self.objective_values:
            return np.zeros((0, 0))
        return np.vstack(self.objective_values)

    def __eq__(self, other) -> bool:
        if not isinstance(other, OptHistory):
            return NotImplemented
        if self.iterations != other.iterations or self.converged != other.converged:
            return False
        if not all(np.array_equal(a, b) for a, b in zip(self.objective_values, other.objective_values)):
            return False
        if (self.designs is None) != (other.designs is None):
            return False
        if self.designs is not None and not all(np.array_equal(a, b) for a, b in zip(self.designs, other.designs)):
            return False
        return self.extra == other.extra


# ---------------------------------------------------------------------------
# Violations and checks
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


@dataclass(frozen=True)
class Violation:
    field: str
    value: float
    bound_lo: float
    bound_hi: float
    category: Category
    severity: Severity
    prefix: str = "Config"
    lo_open: bool = False
    hi_open: bool = False

    @property
    def message(self) -> str:
        left = "(" if self.lo_open or math.isinf(self.bound_lo) else "["
        right = ")" if self.hi_open or math.isinf(self.bound_hi) else "]"
        return (
            f"{self.prefix}.{self.field}: {_fmt(self.value)} ∉ "
            f"{left}{_fmt(self.bound_lo)}, {_fmt(self.bound_hi)}{right} "
            f"({self.category.value}, {self.severity.value})"
        )

    @property
    def is_error(self) -> bool:
        return self.severity is Severity.ERROR

    def __str__(self) -> str:
        return self.message


Bound = float | Callable[[Mapping[str, Any]], float]


@dataclass(frozen=True)
class Check:
    """One row of a constraint table.

    ``value`` extracts the checked quantity from ``(design, env)`` where
    ``env`` merges problem configuration and conditions.  When it is ``None``
    the named entry of ``env`` is used.  Returning ``None`` skips the check
    (e.g. design-dependent checks when no design is given).
    """

    field: str
    lo: Bound
    hi: Bound
    category: Category
    severity: Severity
    lo_open: bool = False
    hi_open: bool = False
    prefix: str = "Config"
    value: Callable[[np.ndarray | None, Mapping[str, Any]], Any] | None = None
    tol: float = 0.0

    def evaluate(self, design, env: Mapping[str, Any]) -> Violation | None:
        if self.value is None:
            if self.field not in env:
                return None
            raw = env[self.field]
        else:
            raw = self.value(design, env)
            if raw is None:
                return None
        lo = self.lo(env) if callable(self.lo) else self.lo
        hi = self.hi(env) if callable(self.hi) else self.hi
        values = np.atleast_1d(np.asarray(raw, dtype=float))
        below = values < lo - self.tol if not self.lo_open else values <= lo - self.tol
        above = values > hi + self.tol if not self.hi_open else values >= hi + self.tol
        bad = below | above | np.isnan(values)
        if not bad.any():
            return None
        if values.size == 1:
            offending = raw if np.ndim(raw) == 0 else values[0]
        else:
            excess = np.where(np.isnan(values), np.inf, np.maximum(lo - values, values - hi))
            offending = float(values[int(np.argmax(excess))])
        return Violation(self.field, offending, lo, hi, self.category, self.severity,
                         self.prefix, self.lo_open, self.hi_open)


THEORY, IMPLEMENTATION = Category.THEORY, Category.IMPLEMENTATION
ERROR, WARNING = Severity.ERROR, Severity.WARNING


def design_entries(design, env):
    return None if design is None else np.asarray(design, dtype=float).ravel()


def design_mean(design, env):
    return None if design is None else float(np.mean(design))


def has_errors(violations: Iterable[Violation]) -> bool:
    return any(v.is_error for v in violations)


# ---------------------------------------------------------------------------
# Problem base class
# ---------------------------------------------------------------------------


class Problem(abc.ABC):
    """Base class for benchmark problems.

    Subclasses declare ``name``, ``version``, ``objectives`` and
    ``conditions`` and implement :meth:`_checks`, :meth:`_simulate` and
    optionally :meth:`_optimize`.  Constructor keyword arguments form the
    problem *configuration* (grid size, solver knobs) and are distinct from
    the per-call *conditions*.
    """

    name: ClassVar[str]
    version: ClassVar[int] = 0
    objectives: ClassVar[tuple[tuple[str, Direction], ...]]
    conditions: ClassVar[tuple[tuple[str, float], ...]]

    def __init__(self, seed: int | None = None, **config):
        self.config = self._configure(**config)
        self.dataset_path: str | None = None
        self.reset(seed)

    def _configure(self, **config) -> dict[str, Any]:
        if config:
            raise TypeError(f"{type(self).__name__} takes no configuration, got {sorted(config)}")
        return {}

    # -- metadata ---------------------------------------------------------
    @property
    @abc.abstractmethod
    def design_space(self) -> DesignSpace:
        ...

    @property
    def spec(self) -> ProblemSpec:
        return ProblemSpec(self.name, self.version, self.design_space, tuple(self.objectives),
                           tuple(self.conditions), self.dataset_path)

    @property
    def problem_id(self) -> str:
        return f"{self.name}/v{self.version}"

    @property
    def conditions_keys(self) -> list[str]:
        return [n for n, _ in self.conditions]

    @property
    def objectives_keys(self) -> list[str]:
        return [n for n, _ in self.objectives]

    # -- seeding ------------------------------------------------------------
    def reset(self, seed: int | None = None) -> None:
        """Re-seed every stochastic component of the problem."""
        self.seed = seed
        self.np_random = np.random.default_rng(seed)

    def random_design(self, seed: int | None = None) -> tuple[np.ndarray, dict[str, float]]:
        rng = self.np_random if seed is None else np.random.default_rng(seed)
        return self.design_space.sample(rng), self.merge_conditions(None)

    # -- conditions and checks ----------------------------------------------
    def merge_conditions(self, conds: Mapping[str, float] | None) -> dict[str, float]:
        merged = dict(self.conditions)
        for key, value in (conds or {}).items():
            if key not in merged:
                raise UnknownConditionError(
                    f"unknown condition {key!r} for {self.problem_id}; expected one of {list(merged)}")
            merged[key] = float(value)
        return merged

    def environment(self, conds: Mapping[str, float] | None) -> dict[str, Any]:
        env = dict(self.config)
        env.update(self.merge_conditions(conds))
        return env

    @abc.abstractmethod
    def _checks(self) -> list[Check]:
        ...

    def check_constraints(self, design=None, conds: Mapping[str, float] | None = None) -> list[Violation]:
        env = self.environment(conds)
        if design is not None:
            design = np.asarray(design, dtype=float)
            if design.shape != self.design_space.shape:
                raise ValueError(f"design shape {design.shape} != {self.design_space.shape}")
        found = []
        for check in self._checks():
            violation = check.evaluate(design, env)
            if violation is not None:
                found.append(violation)
        return found

    def _guard(self, design, conds, strict: bool) -> None:
        if strict:
            errors = [v for v in self.check_constraints(design, conds) if v.is_error]
            if errors:
                raise ConstraintError(errors)

    # -- simulation -----------------------------------------------------------
    def simulate(self, design, conds: Mapping[str, float] | None = None, strict: bool = False) -> np.ndarray:
        """Objective values of ``design`` in declaration order."""
        design = np.asarray(design, dtype=float)
        if design.shape != self.design_space.shape:
            raise ValueError(f"design shape {design.shape} != {self.design_space.shape}")
        self._guard(design, conds, strict)
        return np.atleast_1d(np.asarray(self._simulate(design, self.merge_conditions(conds)), dtype=float))

    @abc.abstractmethod
    def _simulate(self, design: np.ndarray, conds: dict[str, float]) -> np.ndarray:
        ...

    def optimize(self, start=None, conds: Mapping[str, float] | None = None, strict: bool = False,
                 **options) -> tuple[np.ndarray, OptHistory]:
        if start is not None:
            start = np.asarray(start, dtype=float)
            if start.shape != self.design_space.shape:
                raise ValueError(f"start shape {start.shape} != {self.design_space.shape}")
        self._guard(start, conds, strict)
        return self._optimize(start, self.merge_conditions(conds), **options)

    def _optimize(self, start, conds, **options):
        raise NotImplementedError(f"{self.problem_id} has no built-in optimizer")

    def render(self, design, fmt: str = "pgm") -> bytes:
        from designbench import render

        space = self.design_space
        lo = np.broadcast_to(space.lower, space.shape)
        span = np.broadcast_to(space.upper, space.shape) - lo
        x = (np.asarray(design, dtype=float) - lo) / np.where(span > 0, span, 1.0)
        return render.render_density(x, fmt)

    def __repr__(self) -> str:
        cfg = ", ".join(f"{k}={v!r}" for k, v in self.config.items())
        return f"{type(self).__name__}({cfg})"


def check_constraints(problem: Problem, design=None, conds=None) -> list[Violation]:
    return problem.check_constraints(design, conds)


def random_design(spec: ProblemSpec | DesignSpace, seed: int) -> np.ndarray:
    """Uniform sample of the design space, reproducible for ``seed``."""
    space = spec.design_space if isinstance(spec, ProblemSpec) else spec
    return space.sample(np.random.default_rng(seed))


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------

_REGISTRY: dict[str, Callable[..., Problem]] = {}


def _normalize_id(problem_id: str) -> str:
    key = problem_id.strip().strip("/").lower()
    if key.startswith("problems/"):
        key = key[len("problems/"):]
    if "/" not in key:
        key += "/v0"
    return key


def register(problem_id: str, constructor: Callable[..., Problem]) -> None:
    _REGISTRY[_normalize_id(problem_id)] = constructor


def registered() -> list[str]:
    _load_builtin()
    return sorted(_REGISTRY)


def make(problem_id: str, **config) -> Problem:
    """Instantiate a registered problem, e.g. ``make("beams2d/v0", nelx=40)``."""
    _load_builtin()
    key = _normalize_id(problem_id)
    try:
        constructor = _REGISTRY[key]
    except KeyError:
        raise RegistryError(f"unknown problem {problem_id!r}; registered: {sorted(_REGISTRY)}") from None
    return constructor(**config)


def _load_builtin() -> None:
    # Deferred so that importing core does not pull in every simulator.
    import designbench.problems  # noqa: F401
