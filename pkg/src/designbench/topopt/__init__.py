"""Density-based topology optimization on regular grids."""
from designbench.topopt.fem import Grid, element_conduction, element_coupling, element_stiffness
from designbench.topopt.filters import DensityFilter, density_filter
from designbench.topopt.oc import OCStep, oc_step, oc_update
from designbench.topopt.physics import (
    BoundaryConditions,
    CouplingModel,
    ElasticModel,
    ThermalModel,
    compliance_structural,
    compliance_thermal,
    solve_elastic,
    solve_thermal,
    thermoelastic_objectives,
)
from designbench.topopt.problems import Beams2D, HeatConduction2D, ThermoElasticBeams2D, run_oc

__all__ = [
    "Beams2D", "BoundaryConditions", "CouplingModel", "DensityFilter", "ElasticModel", "Grid",
    "HeatConduction2D", "OCStep", "ThermalModel", "ThermoElasticBeams2D", "compliance_structural",
    "compliance_thermal", "density_filter", "element_conduction", "element_coupling", "element_stiffness",
    "oc_step", "oc_update", "run_oc", "solve_elastic", "solve_thermal", "thermoelastic_objectives",
]
