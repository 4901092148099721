"""Regular-grid bilinear finite elements for elasticity and heat conduction.

Numbering follows the 88-line convention: elements are column-major over a
``(nely, nelx)`` array (``e = ely + elx * nely``), nodes likewise over
``(nely + 1, nelx + 1)``, two displacement dofs per node.  Row index grows
downward; element node order is lower-left, lower-right, upper-right,
upper-left.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from designbench.core import SingularSystemError

_GAUSS = 1.0 / np.sqrt(3.0)
_CORNERS = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])


def element_stiffness(E: float = 1.0, nu: float = 0.3) -> np.ndarray:
    """8x8 plane-stress stiffness of a unit square bilinear element."""
    k = np.array([1/2 - nu/6, 1/8 + nu/8, -1/4 - nu/12, -1/8 + 3*nu/8,
                  -1/4 + nu/12, -1/8 - nu/8, nu/6, 1/8 - 3*nu/8])
    order = np.array([
        [0, 1, 2, 3, 4, 5, 6, 7],
        [1, 0, 7, 6, 5, 4, 3, 2],
        [2, 7, 0, 5, 6, 3, 4, 1],
        [3, 6, 5, 0, 7, 2, 1, 4],
        [4, 5, 6, 7, 0, 1, 2, 3],
        [5, 4, 3, 2, 1, 0, 7, 6],
        [6, 3, 4, 1, 2, 7, 0, 5],
        [7, 2, 1, 4, 3, 6, 5, 0],
    ])
    return E / (1 - nu**2) * k[order]


def element_conduction(k: float = 1.0) -> np.ndarray:
    """4x4 conduction matrix of a square bilinear element (size independent in 2-D)."""
    return k / 6.0 * np.array([
        [4.0, -1.0, -2.0, -1.0],
        [-1.0, 4.0, -1.0, -2.0],
        [-2.0, -1.0, 4.0, -1.0],
        [-1.0, -2.0, -1.0, 4.0],
    ])


def _shape(xi: float, eta: float):
    n = 0.25 * (1 + xi * _CORNERS[:, 0]) * (1 + eta * _CORNERS[:, 1])
    dn_dxi = 0.25 * _CORNERS[:, 0] * (1 + eta * _CORNERS[:, 1])
    dn_deta = 0.25 * _CORNERS[:, 1] * (1 + xi * _CORNERS[:, 0])
    return n, dn_dxi, dn_deta


def _strain_displacement(xi: float, eta: float, h: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    n, dxi, deta = _shape(xi, eta)
    dx, dy = dxi * 2.0 / h, deta * 2.0 / h
    B = np.zeros((3, 8))
    B[0, 0::2] = dx
    B[1, 1::2] = dy
    B[2, 0::2] = dy
    B[2, 1::2] = dx
    return B, n


def plane_stress_matrix(E: float = 1.0, nu: float = 0.3) -> np.ndarray:
    return E / (1 - nu**2) * np.array([[1.0, nu, 0.0], [nu, 1.0, 0.0], [0.0, 0.0, (1 - nu) / 2]])


def element_coupling(alpha: float, E: float = 1.0, nu: float = 0.3) -> np.ndarray:
    """8x4 matrix mapping nodal temperature excess to thermal-expansion nodal forces.

    Integrates ``B^T D (alpha * [1, 1, 0]) N^T`` with 2x2 Gauss points over a
    unit square.
    """
    D = plane_stress_matrix(E, nu)
    m = np.array([1.0, 1.0, 0.0]) * alpha
    Ce = np.zeros((8, 4))
    for xi in (-_GAUSS, _GAUSS):
        for eta in (-_GAUSS, _GAUSS):
            B, n = _strain_displacement(xi, eta)
            Ce += np.outer(B.T @ D @ m, n) * 0.25
    return Ce


@dataclass
class Grid:
    nelx: int
    nely: int
    edof: np.ndarray = field(init=False, repr=False)
    enodes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.nelx < 1 or self.nely < 1:
            raise ValueError("grid needs at least one element per side")
        elx, ely = np.meshgrid(np.arange(self.nelx), np.arange(self.nely), indexing="ij")
        elx, ely = elx.ravel(), ely.ravel()
        n1 = (self.nely + 1) * elx + ely
        n2 = (self.nely + 1) * (elx + 1) + ely
        self.enodes = np.stack([n1 + 1, n2 + 1, n2, n1], axis=1)
        self.edof = np.stack([2*n1 + 2, 2*n1 + 3, 2*n2 + 2, 2*n2 + 3, 2*n2, 2*n2 + 1, 2*n1, 2*n1 + 1], axis=1)
        self._iK = np.repeat(self.edof, 8, axis=1).ravel()
        self._jK = np.tile(self.edof, (1, 8)).ravel()
        self._iT = np.repeat(self.enodes, 4, axis=1).ravel()
        self._jT = np.tile(self.enodes, (1, 4)).ravel()

    @property
    def n_elements(self) -> int:
        return self.nelx * self.nely

    @property
    def n_nodes(self) -> int:
        return (self.nelx + 1) * (self.nely + 1)

    @property
    def n_dofs(self) -> int:
        return 2 * self.n_nodes

    def node(self, ix: int, iy: int) -> int:
        """Node id at column ``ix`` (0..nelx) and row ``iy`` (0..nely, top = 0)."""
        return (self.nely + 1) * ix + iy

    def element(self, ix: int, iy: int) -> int:
        return self.nely * ix + iy

    def flatten(self, field2d) -> np.ndarray:
        return np.asarray(field2d, dtype=float).ravel(order="F")

    def unflatten(self, vec) -> np.ndarray:
        return np.asarray(vec).reshape((self.nely, self.nelx), order="F")

    def assemble(self, coeffs: np.ndarray, ke: np.ndarray) -> sp.csc_matrix:
        """Global matrix ``sum_e coeffs[e] * ke`` for 8x8 (elastic) or 4x4 (thermal) ``ke``."""
        if ke.shape == (8, 8):
            i, j, n = self._iK, self._jK, self.n_dofs
        else:
            i, j, n = self._iT, self._jT, self.n_nodes
        vals = (coeffs[:, None] * ke.ravel()[None, :]).ravel()
        return sp.coo_matrix((vals, (i, j)), shape=(n, n)).tocsc()


def simp(x: np.ndarray, low: float, high: float, penal: float) -> np.ndarray:
    return low + x**penal * (high - low)


def simp_derivative(x: np.ndarray, low: float, high: float, penal: float) -> np.ndarray:
    return penal * x**(penal - 1) * (high - low)


def solve_reduced(K: sp.csc_matrix, rhs: np.ndarray, fixed: np.ndarray, what: str,
                  fixed_values: np.ndarray | None = None) -> np.ndarray:
    """Solve ``K u = rhs`` with ``u[fixed]`` prescribed (zero by default).

    Uses a sparse LU factorization; a residual above ``1e-8 * |rhs|`` is
    reported as a singular system.
    """
    n = K.shape[0]
    u = np.zeros(n)
    fixed = np.asarray(fixed, dtype=int)
    if fixed_values is not None:
        u[fixed] = fixed_values
    free = np.setdiff1d(np.arange(n), fixed)
    if free.size == 0:
        return u
    b = rhs[free] - (K[free][:, fixed] @ u[fixed] if fixed.size else 0.0)
    Kff = K[free][:, free].tocsc()
    if not np.any(b):
        return u
    try:
        with np.errstate(all="ignore"):
            uf = spla.splu(Kff).solve(b)
    except RuntimeError as exc:
        raise SingularSystemError(f"{what}: singular system ({exc}); check that supports remove the null space") from exc
    residual = np.linalg.norm(Kff @ uf - b)
    if not np.all(np.isfinite(uf)) or residual > 1e-8 * np.linalg.norm(b):
        raise SingularSystemError(
            f"{what}: singular or ill-posed system (residual {residual:.3e}); check that supports remove the null space")
    u[free] = uf
    return u
