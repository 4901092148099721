"""FDFD photonics: solver, density parametrization and the Photonics2D problem."""
from designbench.photonics.device import DemuxModel, PhotonicsLayout, adjoint_gradient, objective
from designbench.photonics.fdfd import FDFDSolver, fdfd_solve, laplacian, system_matrix
from designbench.photonics.parametrization import (
    ContinuationSchedule,
    ProjectionParams,
    blur,
    blur_matrix,
    project,
    tanh_projection,
    tanh_projection_derivative,
)
from designbench.photonics.problem import Adam, Photonics2D

__all__ = [
    "Adam", "ContinuationSchedule", "DemuxModel", "FDFDSolver", "Photonics2D", "PhotonicsLayout",
    "ProjectionParams", "adjoint_gradient", "blur", "blur_matrix", "fdfd_solve", "laplacian", "objective",
    "project", "system_matrix", "tanh_projection", "tanh_projection_derivative",
]
