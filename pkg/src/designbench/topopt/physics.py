"""Elastic, thermal and one-way coupled thermoelastic objectives with adjoint sensitivities.

All functions take physical densities as ``(nely, nelx)`` arrays and return
sensitivity fields of the same shape.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from designbench.core import SingularSystemError
from designbench.topopt.fem import (
    Grid,
    element_conduction,
    element_coupling,
    element_stiffness,
    simp,
    simp_derivative,
    solve_reduced,
)


@dataclass(frozen=True)
class ElasticModel:
    E0: float = 1.0
    Emin: float = 1e-9
    nu: float = 0.3
    penal: float = 3.0

    @property
    def ke(self) -> np.ndarray:
        return element_stiffness(1.0, self.nu)


@dataclass(frozen=True)
class ThermalModel:
    kmax: float = 1.0
    kmin: float = 1e-3
    penal: float = 3.0
    heat_source: float = 1e-2  # per unit area
    cell_area: float = 1.0
    regularization: float = 0.0

    @property
    def ke(self) -> np.ndarray:
        return element_conduction(1.0)


@dataclass(frozen=True)
class CouplingModel:
    alpha: float = 1e-2
    T_ref: float = 0.0
    nu: float = 0.3

    @property
    def ce(self) -> np.ndarray:
        return element_coupling(self.alpha, 1.0, self.nu)


@dataclass
class BoundaryConditions:
    fixed_dofs: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    loads: list[tuple[int, float]] = field(default_factory=list)
    heatsinks: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    def __post_init__(self):
        self.fixed_dofs = np.unique(np.asarray(self.fixed_dofs, dtype=int))
        self.heatsinks = np.unique(np.asarray(self.heatsinks, dtype=int))

    def force_vector(self, n_dofs: int) -> np.ndarray:
        f = np.zeros(n_dofs)
        for dof, magnitude in self.loads:
            f[dof] += magnitude
        return f


class StructuralResult(NamedTuple):
    compliance: float
    sensitivity: np.ndarray
    displacement: np.ndarray


class ThermalResult(NamedTuple):
    compliance: float
    sensitivity: np.ndarray
    temperature: np.ndarray


class ThermoelasticResult(NamedTuple):
    total: float
    thermal: float
    structural: float
    sensitivity: np.ndarray
    temperature: np.ndarray
    displacement: np.ndarray


def _grid_for(rho: np.ndarray) -> Grid:
    nely, nelx = rho.shape
    return Grid(nelx, nely)


def solve_elastic(rho, model: ElasticModel, bc: BoundaryConditions, grid: Grid | None = None,
                  extra_force: np.ndarray | None = None) -> np.ndarray:
    """Nodal displacement vector for physical densities ``rho``."""
    rho = np.asarray(rho, dtype=float)
    grid = grid or _grid_for(rho)
    if bc.fixed_dofs.size < 3:
        raise SingularSystemError("elastic solve: fewer than 3 fixed dofs leaves rigid-body null space")
    x = grid.flatten(rho)
    K = grid.assemble(simp(x, model.Emin, model.E0, model.penal), model.ke)
    f = bc.force_vector(grid.n_dofs)
    if extra_force is not None:
        f = f + extra_force
    return solve_reduced(K, f, bc.fixed_dofs, "elastic solve")


def heat_load(grid: Grid, model: ThermalModel) -> np.ndarray:
    """Consistent nodal load of a uniform source: each element spreads h*A over its 4 nodes."""
    q = np.zeros(grid.n_nodes)
    np.add.at(q, grid.enodes.ravel(), model.heat_source * model.cell_area / 4.0)
    return q


def solve_thermal(rho, model: ThermalModel, bc: BoundaryConditions, grid: Grid | None = None) -> np.ndarray:
    """Nodal temperatures with ``T = 0`` on heat sinks and insulated elsewhere."""
    rho = np.asarray(rho, dtype=float)
    grid = grid or _grid_for(rho)
    if bc.heatsinks.size == 0:
        raise SingularSystemError("thermal solve: no heat-sink nodes, conduction system is singular")
    x = grid.flatten(rho)
    K = grid.assemble(simp(x, model.kmin, model.kmax, model.penal), model.ke)
    return solve_reduced(K, heat_load(grid, model), bc.heatsinks, "thermal solve")


def _regularization(rho: np.ndarray, weight: float) -> tuple[float, np.ndarray]:
    # Finite-difference gradient energy sum |grad x|^2 dA; the cell size cancels in 2-D.
    if weight == 0.0:
        return 0.0, np.zeros_like(rho)
    gx = np.diff(rho, axis=1)
    gy = np.diff(rho, axis=0)
    value = weight * (np.sum(gx**2) + np.sum(gy**2))
    grad = np.zeros_like(rho)
    grad[:, 1:] += 2 * gx
    grad[:, :-1] -= 2 * gx
    grad[1:, :] += 2 * gy
    grad[:-1, :] -= 2 * gy
    return value, weight * grad


def compliance_structural(rho, model: ElasticModel, bc: BoundaryConditions) -> StructuralResult:
    """Compliance ``F^T U`` and its sensitivity w.r.t. physical densities."""
    rho = np.asarray(rho, dtype=float)
    grid = _grid_for(rho)
    u = solve_elastic(rho, model, bc, grid)
    x = grid.flatten(rho)
    ue = u[grid.edof]
    ce = np.einsum("ei,ij,ej->e", ue, model.ke, ue)
    c = float(np.sum(simp(x, model.Emin, model.E0, model.penal) * ce))
    dc = -simp_derivative(x, model.Emin, model.E0, model.penal) * ce
    return StructuralResult(c, grid.unflatten(dc), u)


def compliance_thermal(rho, model: ThermalModel, bc: BoundaryConditions) -> ThermalResult:
    """Thermal compliance ``Q^T T`` (plus optional gradient regularization) and its sensitivity."""
    rho = np.asarray(rho, dtype=float)
    grid = _grid_for(rho)
    T = solve_thermal(rho, model, bc, grid)
    x = grid.flatten(rho)
    Te = T[grid.enodes]
    ct_e = np.einsum("ei,ij,ej->e", Te, model.ke, Te)
    ct = float(heat_load(grid, model) @ T)
    dct = -simp_derivative(x, model.kmin, model.kmax, model.penal) * ct_e
    reg, dreg = _regularization(rho, model.regularization)
    return ThermalResult(ct + reg, grid.unflatten(dct) + dreg, T)


def thermal_forces(grid: Grid, x: np.ndarray, T: np.ndarray, coupling: CouplingModel, penal: float) -> np.ndarray:
    """Assembled expansion forces ``sum_e x_e^p C_e (T_e - T_ref)``."""
    dT = T[grid.enodes] - coupling.T_ref
    fe = (x**penal)[:, None] * (dT @ coupling.ce.T)
    f = np.zeros(grid.n_dofs)
    np.add.at(f, grid.edof.ravel(), fe.ravel())
    return f


def thermoelastic_objectives(rho, elastic: ElasticModel, thermal: ThermalModel, coupling: CouplingModel,
                             bc: BoundaryConditions) -> ThermoelasticResult:
    """Total compliance ``C = C_T + C_S`` with one-way thermal-to-elastic coupling.

    ``C_S = U^T K U`` where ``K U = F_ext + F_th(x, T)``.  The sensitivity
    is ``dC_T + 2 U^T dF_th/dx|_T - U^T dK U - lam^T dK_t T`` with the
    thermal adjoint ``K_t lam = 2 A(x)^T U`` (``A`` maps temperature to
    expansion force).
    """
    rho = np.asarray(rho, dtype=float)
    grid = _grid_for(rho)
    x = grid.flatten(rho)
    therm = compliance_thermal(rho, thermal, bc)
    T = therm.temperature
    f_th = thermal_forces(grid, x, T, coupling, elastic.penal)
    u = solve_elastic(rho, elastic, bc, grid, extra_force=f_th)
    f_total = bc.force_vector(grid.n_dofs) + f_th
    free = np.setdiff1d(np.arange(grid.n_dofs), bc.fixed_dofs)
    c_s = float(f_total[free] @ u[free])

    ue = u[grid.edof]
    Te = T[grid.enodes]
    dT = Te - coupling.T_ref
    ce = np.einsum("ei,ij,ej->e", ue, elastic.ke, ue)
    d_stiff = -simp_derivative(x, elastic.Emin, elastic.E0, elastic.penal) * ce
    d_force = 2.0 * elastic.penal * x**(elastic.penal - 1) * np.einsum("ei,ij,ej->e", ue, coupling.ce, dT)

    # adjoint for the temperature dependence of the expansion forces
    g = np.zeros(grid.n_nodes)
    np.add.at(g, grid.enodes.ravel(), (2.0 * (x**elastic.penal)[:, None] * (ue @ coupling.ce)).ravel())
    Kt = grid.assemble(simp(x, thermal.kmin, thermal.kmax, thermal.penal), thermal.ke)
    lam = solve_reduced(Kt, g, bc.heatsinks, "thermal adjoint")
    lame = lam[grid.enodes]
    d_temp = -simp_derivative(x, thermal.kmin, thermal.kmax, thermal.penal) * np.einsum(
        "ei,ij,ej->e", lame, thermal.ke, Te)

    dC = therm.sensitivity + grid.unflatten(d_stiff + d_force + d_temp)
    return ThermoelasticResult(therm.compliance + c_s, therm.compliance, c_s, dC, T, u)
