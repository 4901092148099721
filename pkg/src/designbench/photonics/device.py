"""Two-wavelength demultiplexer layout, modal-overlap objective and its adjoint gradient."""
from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from designbench.photonics.fdfd import FDFDSolver
from designbench.photonics.parametrization import (
    ProjectionParams,
    blur_matrix,
    tanh_projection,
    tanh_projection_derivative,
)


def half_cosine(n: int) -> np.ndarray:
    """Unit-norm half-cosine profile over ``n`` samples (vanishing just outside the slice)."""
    t = (np.arange(n) + 1) / (n + 1)
    m = np.sin(np.pi * t)
    return m / np.linalg.norm(m)


@dataclass(frozen=True)
class Port:
    """A vertical slice ``rows`` at column ``col`` of the simulation grid."""

    col: int
    rows: slice

    def take(self, field: np.ndarray) -> np.ndarray:
        return field[self.rows, self.col]


@dataclass(frozen=True)
class PhotonicsLayout:
    """Simulation grid with a central design block, one input guide on the left and two outputs on the right.

    Going outwards from the design block there are ``space`` cells of
    background, then ``pml_cells`` of absorber.  Output guides are centred
    at one and two thirds of the design height.  Arrays are ``(rows, cols)``
    with row 0 at the bottom.
    """

    nelx: int = 120
    nely: int = 120
    dl: float = 0.04  # micrometres
    pml_cells: int = 20
    space: int = 20
    eps_lo: float = 1.0
    eps_hi: float = 12.0
    waveguide_width: int | None = None

    def __post_init__(self):
        if self.pml_cells < 8:
            raise ValueError("pml_cells must be >= 8")
        if self.space < 4:
            raise ValueError("space must leave room for the ports (>= 4 cells)")
        if self.nelx < 1 or self.nely < 1:
            raise ValueError("design block must be at least 1x1")
        _, c1, c2 = self.centres
        if c2 - c1 <= 2 * self.port_halfwidth:
            raise ValueError("output ports overlap for this design height")

    @property
    def wg_width(self) -> int:
        return self.waveguide_width or max(2, round(self.nely / 12))

    @property
    def port_halfwidth(self) -> int:
        return self.wg_width

    @property
    def offset(self) -> int:
        return self.pml_cells + self.space

    @property
    def shape(self) -> tuple[int, int]:
        return self.nely + 2 * self.offset, self.nelx + 2 * self.offset

    @property
    def design_slice(self) -> tuple[slice, slice]:
        o = self.offset
        return slice(o, o + self.nely), slice(o, o + self.nelx)

    @property
    def centres(self) -> tuple[int, int, int]:
        """Row centres of the input guide and the two output guides."""
        o = self.offset
        return o + self.nely // 2, o + self.nely // 3, o + (2 * self.nely) // 3

    def _port(self, col: int, centre: int) -> Port:
        h = self.port_halfwidth
        return Port(col, slice(centre - h, centre + h + 1))

    @property
    def input_port(self) -> Port:
        return self._port(self.pml_cells + self.space // 2, self.centres[0])

    @property
    def output_ports(self) -> tuple[Port, Port]:
        col = self.shape[1] - 1 - self.pml_cells - self.space // 2
        return self._port(col, self.centres[1]), self._port(col, self.centres[2])

    @property
    def modes(self) -> tuple[np.ndarray, np.ndarray]:
        n = 2 * self.port_halfwidth + 1
        return half_cosine(n), half_cosine(n)

    def _guide(self, eps: np.ndarray, centre: int, cols: slice) -> None:
        lo = centre - self.wg_width // 2
        eps[lo:lo + self.wg_width, cols] = self.eps_hi

    def background(self) -> np.ndarray:
        """Permittivity outside the design block (design block left at ``eps_lo``)."""
        eps = np.full(self.shape, self.eps_lo)
        o = self.offset
        c_in, c1, c2 = self.centres
        self._guide(eps, c_in, slice(0, o))
        self._guide(eps, c1, slice(o + self.nelx, None))
        self._guide(eps, c2, slice(o + self.nelx, None))
        return eps

    def permittivity(self, rho: np.ndarray) -> np.ndarray:
        """Full permittivity map for a projected density ``rho`` on the design block."""
        eps = self.background()
        eps[self.design_slice] = self.eps_lo + np.asarray(rho) * (self.eps_hi - self.eps_lo)
        return eps

    def source(self) -> np.ndarray:
        b = np.zeros(self.shape, dtype=complex)
        p = self.input_port
        b[p.rows, p.col] = 1.0
        return b

    def straight_guide(self) -> np.ndarray:
        """Reference map: the input guide running straight across the whole grid."""
        eps = np.full(self.shape, self.eps_lo)
        self._guide(eps, self.centres[0], slice(None))
        return eps


def overlap(field: np.ndarray, port: Port, mode: np.ndarray) -> complex:
    return complex(mode @ port.take(field))


@functools.lru_cache(maxsize=32)
def reference_power(layout: PhotonicsLayout, omega: float) -> float:
    """Squared overlap that a straight guide delivers at the output column.

    Dividing by it turns each overlap into a transmission-like ratio that
    does not depend on grid spacing or source scaling.
    """
    e = FDFDSolver(layout.straight_guide(), omega, layout.dl, layout.pml_cells).solve(layout.source())
    col = layout.output_ports[0].col
    port = layout._port(col, layout.centres[0])
    return abs(overlap(e, port, layout.modes[0])) ** 2


def objective(e1: np.ndarray, e2: np.ndarray, layout: PhotonicsLayout, x: np.ndarray, w: float,
              norms: tuple[float, float] = (1.0, 1.0)) -> float:
    """Product of the two squared modal overlaps minus ``w * ||x||^2``."""
    p1, p2 = layout.output_ports
    m1, m2 = layout.modes
    f1 = abs(overlap(e1, p1, m1)) ** 2 / norms[0]
    f2 = abs(overlap(e2, p2, m2)) ** 2 / norms[1]
    return f1 * f2 - w * float(np.sum(np.asarray(x) ** 2))


class Evaluation:
    """Objective value, gradient and fields for one density at one projection strength."""

    def __init__(self, value: float, gradient: np.ndarray, fields: tuple[np.ndarray, np.ndarray],
                 eps: np.ndarray, factors: tuple[float, float]):
        self.value = value
        self.gradient = gradient
        self.fields = fields
        self.eps = eps
        self.factors = factors


class DemuxModel:
    """Forward model ``x -> eps -> (e1, e2) -> objective`` with adjoint gradient."""

    def __init__(self, layout: PhotonicsLayout, wavelengths: tuple[float, float], blur_radius: int,
                 w: float, eta: float = 0.5, normalize: bool = True):
        self.layout = layout
        self.omegas = tuple(2 * np.pi / lam for lam in wavelengths)
        self.blur = blur_matrix((layout.nely, layout.nelx), blur_radius)
        self.eta = eta
        self.w = w
        self.norms = tuple(reference_power(layout, om) for om in self.omegas) if normalize else (1.0, 1.0)

    def projected(self, x: np.ndarray, beta: float) -> np.ndarray:
        y = self.blur @ np.asarray(x, dtype=float).ravel()
        return tanh_projection(y, beta, self.eta).reshape(self.layout.nely, self.layout.nelx)

    def evaluate(self, x: np.ndarray, beta: float, gradient: bool = True) -> Evaluation:
        lay = self.layout
        x = np.asarray(x, dtype=float)
        y = self.blur @ x.ravel()
        rho = tanh_projection(y, beta, self.eta).reshape(x.shape)
        eps = lay.permittivity(rho)
        src = lay.source()
        ports, modes = lay.output_ports, lay.modes
        fields, amps, adjoints = [], [], []
        for omega, port, mode in zip(self.omegas, ports, modes):
            solver = FDFDSolver(eps, omega, lay.dl, lay.pml_cells)
            e = solver.solve(src)
            fields.append(e)
            amps.append(overlap(e, port, mode))
            if gradient:
                c = np.zeros(lay.shape, dtype=complex)
                c[port.rows, port.col] = mode
                adjoints.append(solver.solve_transpose(c))
        f = [abs(a) ** 2 / n for a, n in zip(amps, self.norms)]
        value = f[0] * f[1] - self.w * float(np.sum(x**2))
        if not gradient:
            return Evaluation(value, None, tuple(fields), eps, tuple(f))

        # d|o|^2/d eps_k = 2 Re(conj(o) * (-omega^2 lam_k e_k)),  lam = A^-T c
        d_eps = np.zeros(lay.shape)
        for i, (omega, e, lam, amp) in enumerate(zip(self.omegas, fields, adjoints, amps)):
            df = 2 * np.real(np.conj(amp) * (-omega**2) * lam * e) / self.norms[i]
            d_eps += df * f[1 - i]
        d_rho = d_eps[lay.design_slice].ravel() * (lay.eps_hi - lay.eps_lo)
        d_y = d_rho * tanh_projection_derivative(y, beta, self.eta)
        grad = (self.blur.T @ d_y).reshape(x.shape) - 2 * self.w * x
        return Evaluation(value, grad, tuple(fields), eps, tuple(f))


def adjoint_gradient(x: np.ndarray, layout: PhotonicsLayout, params: ProjectionParams,
                     omega1: float, omega2: float, w: float, normalize: bool = False) -> np.ndarray:
    """Gradient of the demultiplexer objective with respect to the raw densities."""
    model = DemuxModel(layout, (2 * np.pi / omega1, 2 * np.pi / omega2), params.blur_radius, w,
                       params.eta, normalize)
    return model.evaluate(x, params.beta).gradient
