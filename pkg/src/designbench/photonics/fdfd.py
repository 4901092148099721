"""2-D finite-difference frequency-domain solver for the out-of-plane E field.

Normalized units: ``c = eps0 = mu0 = 1``; lengths in micrometres, so
``omega = 2 * pi / wavelength``.  The operator is

    A = Sx_b^-1 Dx_b Sx_f^-1 Dx_f + Sy_b^-1 Dy_b Sy_f^-1 Dy_f + omega^2 diag(eps)

with zero-field (Dirichlet) closure outside the grid and a polynomially
graded stretched-coordinate PML on all four edges.  Fields are ``(Ny, Nx)``
arrays flattened row-major.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from designbench.core import SimulationError

PML_ORDER = 3
PML_LN_R = -16.0


def _forward_difference(n: int, dl: float) -> sp.csr_matrix:
    return sp.diags([-np.ones(n), np.ones(n - 1)], [0, 1], shape=(n, n), format="csr") / dl


def stretch_factors(n: int, npml: int, omega: float, dl: float, half_step: bool) -> np.ndarray:
    """Complex coordinate stretching ``1 - i sigma(d) / omega`` along one axis."""
    s = np.ones(n, dtype=complex)
    if npml == 0:
        return s
    pos = np.arange(n) + (0.5 if half_step else 0.0)
    depth = np.maximum(np.maximum(npml - pos, pos - (n - npml - 1)), 0.0) / npml
    depth = np.minimum(depth, 1.0)
    thickness = npml * dl
    sigma_max = -(PML_ORDER + 1) * PML_LN_R / (2 * thickness)
    return 1 - 1j * sigma_max * depth**PML_ORDER / omega


def laplacian(shape: tuple[int, int], dl: float, omega: float, npml: int) -> sp.csr_matrix:
    """PML-stretched 5-point Laplacian (without the ``omega^2 eps`` term)."""
    ny, nx = shape
    dxf = sp.kron(sp.identity(ny), _forward_difference(nx, dl), format="csr")
    dyf = sp.kron(_forward_difference(ny, dl), sp.identity(nx), format="csr")
    sxf = np.tile(stretch_factors(nx, npml, omega, dl, True), ny)
    sxb = np.tile(stretch_factors(nx, npml, omega, dl, False), ny)
    syf = np.repeat(stretch_factors(ny, npml, omega, dl, True), nx)
    syb = np.repeat(stretch_factors(ny, npml, omega, dl, False), nx)
    lap_x = sp.diags(1 / sxb) @ (-dxf.T) @ sp.diags(1 / sxf) @ dxf
    lap_y = sp.diags(1 / syb) @ (-dyf.T) @ sp.diags(1 / syf) @ dyf
    return (lap_x + lap_y).tocsr()


def system_matrix(eps: np.ndarray, omega: float, dl: float, npml: int) -> sp.csc_matrix:
    eps = np.asarray(eps)
    return (laplacian(eps.shape, dl, omega, npml) + omega**2 * sp.diags(eps.ravel())).tocsc()


class FDFDSolver:
    """Factorized FDFD system for one permittivity map and frequency.

    The factorization serves forward solves and transposed (adjoint) solves.
    """

    def __init__(self, eps: np.ndarray, omega: float, dl: float, npml: int):
        if omega <= 0:
            raise ValueError("omega must be positive")
        self.shape = np.shape(eps)
        self.omega = omega
        self.A = system_matrix(eps, omega, dl, npml)
        try:
            self._lu = spla.splu(self.A)
        except RuntimeError as exc:
            raise SimulationError(f"FDFD factorization failed: {exc}") from exc

    def _checked(self, x: np.ndarray, b: np.ndarray, transpose: bool) -> np.ndarray:
        A = self.A.T if transpose else self.A
        residual = np.linalg.norm(A @ x - b)
        if not np.all(np.isfinite(x)) or residual > 1e-8 * max(np.linalg.norm(b), 1e-300):
            raise SimulationError(f"FDFD solve did not converge: residual {residual:.3e} vs |b| {np.linalg.norm(b):.3e}")
        return x

    def solve(self, source: np.ndarray) -> np.ndarray:
        """Field for current ``source``: ``A e = i omega b``."""
        b = 1j * self.omega * np.asarray(source, dtype=complex).ravel()
        if not np.any(b):
            return np.zeros(self.shape, dtype=complex)
        return self._checked(self._lu.solve(b), b, False).reshape(self.shape)

    def solve_transpose(self, rhs: np.ndarray) -> np.ndarray:
        b = np.asarray(rhs, dtype=complex).ravel()
        if not np.any(b):
            return np.zeros(self.shape, dtype=complex)
        return self._checked(self._lu.solve(b, trans="T"), b, True).reshape(self.shape)


def fdfd_solve(eps: np.ndarray, omega: float, source: np.ndarray, dl: float, npml: int) -> np.ndarray:
    """One-shot solve of ``(Laplacian + omega^2 eps) e = i omega source``."""
    if npml and npml < 8:
        raise ValueError("PML needs at least 8 cells")
    return FDFDSolver(eps, omega, dl, npml).solve(source)
