"""Engineering-design benchmark problems, metrics and optimizers."""
from designbench.core import (
    Category,
    ConstraintError,
    DesignSpace,
    Direction,
    OptHistory,
    Problem,
    ProblemSpec,
    Severity,
    SimulationError,
    Violation,
    make,
    registered,
)

__version__ = "0.1.0"
__all__ = [
    "Category", "ConstraintError", "DesignSpace", "Direction", "OptHistory", "Problem", "ProblemSpec",
    "Severity", "SimulationError", "Violation", "make", "registered",
]
