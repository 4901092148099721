"""Beams2D, HeatConduction2D and ThermoElasticBeams2D."""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from designbench.core import (
    ERROR,
    IMPLEMENTATION,
    THEORY,
    WARNING,
    Check,
    DesignBenchError,
    DesignSpace,
    Direction,
    OptHistory,
    Problem,
    SimulationError,
    design_entries,
    design_mean,
)
from designbench.topopt.fem import Grid
from designbench.topopt.filters import DensityFilter
from designbench.topopt.oc import oc_step
from designbench.topopt.physics import (
    BoundaryConditions,
    CouplingModel,
    ElasticModel,
    ThermalModel,
    compliance_structural,
    compliance_thermal,
    thermoelastic_objectives,
)

INF = math.inf
VOLUME_TOL = 1e-3


def run_oc(evaluate: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]], x0: np.ndarray,
           flt: DensityFilter, volfrac: float, move: float = 0.2, max_iter: int = 2000,
           tol: float = 0.01, store_designs: bool = False) -> tuple[np.ndarray, OptHistory]:
    """filter -> solve -> sensitivities -> OC loop on a ``(nely, nelx)`` grid.

    ``evaluate(x_phys)`` returns ``(objective_values, d_primary/d_x_phys)``.
    Stops when the largest design change falls below ``tol``.
    """
    nely, nelx = x0.shape
    x = x0.ravel(order="F").astype(float)
    x_phys = flt.apply(x)
    dv = flt.backward(np.ones_like(x))
    history = OptHistory(designs=[] if store_designs else None)
    for _ in range(max_iter):
        phys2d = x_phys.reshape((nely, nelx), order="F")
        try:
            values, grad = evaluate(phys2d)
        except DesignBenchError as exc:
            history.final_variables = x.reshape((nely, nelx), order="F")
            raise SimulationError(f"solver failed at iteration {history.iterations}: {exc}", history) from exc
        history.append(values, phys2d, volume=float(x_phys.mean()))
        dc = flt.backward(grad.ravel(order="F"))
        step = oc_step(x, dc, dv, volfrac, move, flt.apply)
        change = float(np.max(np.abs(step.x - x)))
        x, x_phys = step.x, step.x_phys
        if change < tol:
            history.converged = True
            break
    history.final_variables = x.reshape((nely, nelx), order="F")
    # the filter can overshoot 1 by an ulp; keep the returned design inside the box
    return np.clip(x_phys, 0.0, 1.0).reshape((nely, nelx), order="F"), history


class _GridProblem(Problem):
    """Shared plumbing for density-grid problems."""

    def _grid_shape(self) -> tuple[int, int]:
        raise NotImplementedError

    @property
    def design_space(self) -> DesignSpace:
        return DesignSpace(0.0, 1.0, self._grid_shape())

    def _volume_key(self) -> str:
        return "volfrac"

    def _rmin(self, conds) -> float:
        return conds["rmin"]

    def _evaluator(self, conds) -> Callable:
        raise NotImplementedError

    def _optimize(self, start, conds, max_iter=None, tol=None, store_designs=False):
        volfrac = conds[self._volume_key()]
        nely, nelx = self._grid_shape()
        x0 = np.full((nely, nelx), volfrac) if start is None else np.clip(start, 0.0, 1.0)
        flt = DensityFilter(nelx, nely, self._rmin(conds))
        return run_oc(self._evaluator(conds), x0, flt, volfrac, self.config["move"],
                      max_iter or self.config["max_iter"], tol or self.config["tol"], store_designs)


class Beams2D(_GridProblem):
    """Right half of an MBB beam: symmetry on the left edge, roller at bottom-right.

    The unit downward load sits on the top edge at ``forcedist * nelx``.
    The ``overhang_constraint`` condition is accepted but has no effect.
    """

    name = "beams2d"
    version = 0
    objectives = (("compliance", Direction.MINIMIZE),)
    conditions = (("volfrac", 0.35), ("forcedist", 0.0), ("rmin", 2.0), ("overhang_constraint", 0.0))

    def _configure(self, nelx: int = 100, nely: int = 50, max_iter: int = 2000, tol: float = 0.01,
                   move: float = 0.2, penal: float = 3.0, E0: float = 1.0, Emin: float = 1e-9, nu: float = 0.3):
        return dict(nelx=int(nelx), nely=int(nely), max_iter=int(max_iter), tol=tol, move=move,
                    penal=penal, E0=E0, Emin=Emin, nu=nu)

    def _grid_shape(self):
        return self.config["nely"], self.config["nelx"]

    @property
    def model(self) -> ElasticModel:
        c = self.config
        return ElasticModel(c["E0"], c["Emin"], c["nu"], c["penal"])

    def boundary_conditions(self, conds) -> BoundaryConditions:
        grid = Grid(self.config["nelx"], self.config["nely"])
        left_x = 2 * np.arange(grid.nely + 1)
        roller = 2 * grid.node(grid.nelx, grid.nely) + 1
        ix = int(round(conds["forcedist"] * grid.nelx))
        ix = min(max(ix, 0), grid.nelx)
        return BoundaryConditions(fixed_dofs=np.append(left_x, roller),
                                  loads=[(2 * grid.node(ix, 0) + 1, -1.0)])

    def _evaluator(self, conds):
        model, bc = self.model, self.boundary_conditions(conds)

        def evaluate(x_phys):
            res = compliance_structural(x_phys, model, bc)
            return np.array([res.compliance]), res.sensitivity
        return evaluate

    def _simulate(self, design, conds):
        return [compliance_structural(design, self.model, self.boundary_conditions(conds)).compliance]

    def _checks(self):
        return [
            Check("values", 0.0, 1.0, THEORY, ERROR, prefix="Design", value=design_entries),
            Check("nelx", 1, INF, THEORY, ERROR),
            Check("nely", 1, INF, THEORY, ERROR),
            Check("volfrac", 0.0, 1.0, THEORY, ERROR),
            Check("rmin", 0.0, INF, THEORY, ERROR, lo_open=True),
            Check("forcedist", 0.0, 1.0, THEORY, ERROR),
            Check("volume_fraction", 0.0, lambda env: env["volfrac"], THEORY, WARNING,
                  prefix="Design", value=design_mean, tol=VOLUME_TOL),
            Check("rmin", 0.0, lambda env: 0.5 * max(env["nelx"], env["nely"]), IMPLEMENTATION, ERROR,
                  lo_open=True, hi_open=True),
            Check("nelx", 10, 1000, IMPLEMENTATION, WARNING),
            Check("nely", 10, 1000, IMPLEMENTATION, WARNING),
            Check("volfrac", 0.1, 0.9, IMPLEMENTATION, WARNING),
            Check("rmin", 1.0, 10.0, IMPLEMENTATION, WARNING),
        ]


class HeatConduction2D(_GridProblem):
    """Thermal compliance on the unit square with a centred adiabatic bottom segment.

    ``resolution`` counts elements per side.  Bottom-edge nodes at distance
    ``>= length / 2`` from the centre are held at ``T = 0``; with
    ``length = 1`` only the two bottom corners remain as sinks.  All other
    boundaries are insulated.
    """

    name = "heatconduction2d"
    version = 0
    objectives = (("thermal_compliance", Direction.MINIMIZE),)
    conditions = (("volume", 0.5), ("length", 0.5))

    def _configure(self, resolution: int = 101, rmin: float = 1.5, max_iter: int = 2000, tol: float = 0.01,
                   move: float = 0.2, penal: float = 3.0, kmax: float = 1.0, kmin: float = 1e-3,
                   heat_source: float = 1e-2, regularization: float = 0.0):
        return dict(resolution=int(resolution), rmin=rmin, max_iter=int(max_iter), tol=tol, move=move,
                    penal=penal, kmax=kmax, kmin=kmin, heat_source=heat_source,
                    regularization=regularization)

    def _grid_shape(self):
        n = self.config["resolution"]
        return n, n

    def _volume_key(self):
        return "volume"

    def _rmin(self, conds):
        return self.config["rmin"]

    @property
    def model(self) -> ThermalModel:
        c = self.config
        return ThermalModel(c["kmax"], c["kmin"], c["penal"], c["heat_source"],
                            1.0 / c["resolution"] ** 2, c["regularization"])

    def boundary_conditions(self, conds) -> BoundaryConditions:
        n = self.config["resolution"]
        grid = Grid(n, n)
        ix = np.arange(n + 1)
        sink = np.abs(ix / n - 0.5) >= conds["length"] / 2 - 1e-12
        return BoundaryConditions(heatsinks=[grid.node(i, n) for i in ix[sink]])

    def _evaluator(self, conds):
        model, bc = self.model, self.boundary_conditions(conds)

        def evaluate(x_phys):
            res = compliance_thermal(x_phys, model, bc)
            return np.array([res.compliance]), res.sensitivity
        return evaluate

    def _simulate(self, design, conds):
        return [compliance_thermal(design, self.model, self.boundary_conditions(conds)).compliance]

    def _checks(self):
        return [
            Check("values", 0.0, 1.0, THEORY, ERROR, prefix="Design", value=design_entries),
            Check("resolution", 1, INF, THEORY, ERROR),
            Check("volume", 0.0, 1.0, THEORY, ERROR),
            Check("length", 0.0, 1.0, THEORY, ERROR),
            Check("volume_fraction", 0.0, lambda env: env["volume"], THEORY, WARNING,
                  prefix="Design", value=design_mean, tol=VOLUME_TOL),
            Check("resolution", 10, 1000, IMPLEMENTATION, WARNING),
            Check("volume", 0.3, 0.6, IMPLEMENTATION, WARNING),
        ]


class ThermoElasticBeams2D(_GridProblem):
    """Square domain with one-way thermal-to-elastic coupling.

    Boundary conditions follow the dataset layout: one loaded element on the
    bottom edge, two clamped elements (one on the left, one on the top edge)
    and heat sinks along a stretch of the right edge.  Positions are
    fractions of the respective edge.
    """

    name = "thermoelasticbeams2d"
    version = 0
    objectives = (
        ("total_compliance", Direction.MINIMIZE),
        ("thermal_compliance", Direction.MINIMIZE),
        ("structural_compliance", Direction.MINIMIZE),
    )
    conditions = (
        ("volfrac", 0.3),
        ("rmin", 1.5),
        ("load_position", 0.5),
        ("fixed_left_position", 0.5),
        ("fixed_top_position", 0.5),
        ("heatsink_start", 0.25),
        ("heatsink_end", 0.75),
    )

    def _configure(self, nelx: int = 64, nely: int = 64, max_iter: int = 2000, tol: float = 0.01,
                   move: float = 0.2, penal: float = 3.0, E0: float = 1.0, Emin: float = 1e-9, nu: float = 0.3,
                   kmax: float = 1.0, kmin: float = 1e-3, heat_source: float = 1e-2, alpha: float = 1e-2,
                   T_ref: float = 0.0, regularization: float = 0.0):
        return dict(nelx=int(nelx), nely=int(nely), max_iter=int(max_iter), tol=tol, move=move, penal=penal,
                    E0=E0, Emin=Emin, nu=nu, kmax=kmax, kmin=kmin, heat_source=heat_source, alpha=alpha,
                    T_ref=T_ref, regularization=regularization)

    def _grid_shape(self):
        return self.config["nely"], self.config["nelx"]

    def models(self) -> tuple[ElasticModel, ThermalModel, CouplingModel]:
        c = self.config
        return (ElasticModel(c["E0"], c["Emin"], c["nu"], c["penal"]),
                ThermalModel(c["kmax"], c["kmin"], c["penal"], c["heat_source"], 1.0, c["regularization"]),
                CouplingModel(c["alpha"], c["T_ref"], c["nu"]))

    def boundary_conditions(self, conds) -> BoundaryConditions:
        return dataset_style_bc(self.config["nelx"], self.config["nely"], conds)

    def _evaluator(self, conds):
        elastic, thermal, coupling = self.models()
        bc = self.boundary_conditions(conds)

        def evaluate(x_phys):
            res = thermoelastic_objectives(x_phys, elastic, thermal, coupling, bc)
            return np.array([res.total, res.thermal, res.structural]), res.sensitivity
        return evaluate

    def _simulate(self, design, conds):
        res = thermoelastic_objectives(design, *self.models(), self.boundary_conditions(conds))
        return [res.total, res.thermal, res.structural]

    def _checks(self):
        return [
            Check("values", 0.0, 1.0, THEORY, ERROR, prefix="Design", value=design_entries),
            Check("nelx", 1, INF, THEORY, ERROR),
            Check("nely", 1, INF, THEORY, ERROR),
            Check("volfrac", 0.0, 1.0, THEORY, ERROR),
            Check("rmin", 0.0, INF, THEORY, ERROR, lo_open=True),
            Check("volume_fraction", 0.0, lambda env: env["volfrac"], THEORY, WARNING,
                  prefix="Design", value=design_mean, tol=VOLUME_TOL),
            Check("rmin", 0.0, lambda env: float(min(env["nelx"], env["nely"])), IMPLEMENTATION, ERROR,
                  lo_open=True, hi_open=True),
            Check("nelx", 10, 1000, IMPLEMENTATION, WARNING),
            Check("nely", 10, 1000, IMPLEMENTATION, WARNING),
            Check("volfrac", 0.1, 0.9, IMPLEMENTATION, WARNING),
            Check("rmin", 1.0, 10.0, IMPLEMENTATION, WARNING),
        ]


def _index(fraction: float, count: int) -> int:
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"edge position {fraction} outside [0, 1]")
    return min(int(math.floor(fraction * count)), count - 1)


def dataset_style_bc(nelx: int, nely: int, conds) -> BoundaryConditions:
    """Load on a bottom element, clamped left/top elements, sinks on the right edge."""
    grid = Grid(nelx, nely)
    fixed = []
    for ix, iy in ((0, _index(conds["fixed_left_position"], nely)), (_index(conds["fixed_top_position"], nelx), 0)):
        e = grid.element(ix, iy)
        fixed.extend(grid.edof[e])
    lx = _index(conds["load_position"], nelx)
    loads = [(2 * grid.node(lx, nely) + 1, -0.5), (2 * grid.node(lx + 1, nely) + 1, -0.5)]
    lo, hi = conds["heatsink_start"], conds["heatsink_end"]
    if not 0.0 <= lo <= hi <= 1.0:
        raise ValueError(f"heat-sink span [{lo}, {hi}] is not a sub-interval of [0, 1]")
    rows = np.arange(int(math.floor(lo * nely)), int(math.ceil(hi * nely)) + 1)
    sinks = [grid.node(nelx, iy) for iy in rows]
    return BoundaryConditions(fixed_dofs=fixed, loads=loads, heatsinks=sinks)
