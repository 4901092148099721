"""Photonics2D: two-wavelength demultiplexer optimized with Adam under beta continuation."""
from __future__ import annotations

import math

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
)
from designbench.photonics.device import DemuxModel, PhotonicsLayout
from designbench.photonics.parametrization import ContinuationSchedule

INF = math.inf


class Adam:
    """Plain Adam on a box-constrained array (ascent when ``maximize``)."""

    def __init__(self, step: float = 0.05, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.step, self.beta1, self.beta2, self.eps = step, beta1, beta2, eps
        self.m = self.v = None
        self.t = 0

    def update(self, x: np.ndarray, grad: np.ndarray, maximize: bool = True) -> np.ndarray:
        if self.m is None:
            self.m, self.v = np.zeros_like(grad), np.zeros_like(grad)
        self.t += 1
        self.m = self.beta1 * self.m + (1 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1 - self.beta2) * grad**2
        m_hat = self.m / (1 - self.beta1**self.t)
        v_hat = self.v / (1 - self.beta2**self.t)
        delta = self.step * m_hat / (np.sqrt(v_hat) + self.eps)
        return np.clip(x + delta if maximize else x - delta, 0.0, 1.0)


class Photonics2D(Problem):
    """Route ``lambda1`` to the lower output guide and ``lambda2`` to the upper one.

    Each squared overlap is divided by what a straight guide delivers, so the
    product is roughly a joint transmission.  The material penalty uses
    ``penalty_weight / (nelx * nely)`` per squared density.  Without a start
    design the optimizer begins from uniform noise drawn from the seeded RNG.
    """

    name = "photonics2d"
    version = 0
    objectives = (("overlap", Direction.MAXIMIZE),)
    conditions = (("lambda1", 1.5), ("lambda2", 1.3), ("blur_radius", 2))

    def _configure(self, nelx: int = 120, nely: int = 120, dl: float = 0.04, pml_cells: int = 20,
                   space: int = 20, eps_lo: float = 1.0, eps_hi: float = 12.0, penalty_weight: float = 1e-2,
                   num_iters: int = 100, step_size: float = 0.05, beta_start: float = 1.0,
                   beta_end: float = 300.0, eta: float = 0.5):
        return dict(nelx=int(nelx), nely=int(nely), dl=dl, pml_cells=int(pml_cells), space=int(space),
                    eps_lo=eps_lo, eps_hi=eps_hi, penalty_weight=penalty_weight, num_iters=int(num_iters),
                    step_size=step_size, beta_start=beta_start, beta_end=beta_end, eta=eta)

    @property
    def design_space(self) -> DesignSpace:
        return DesignSpace(0.0, 1.0, (self.config["nely"], self.config["nelx"]))

    @property
    def layout(self) -> PhotonicsLayout:
        c = self.config
        return PhotonicsLayout(c["nelx"], c["nely"], c["dl"], c["pml_cells"], c["space"], c["eps_lo"], c["eps_hi"])

    def schedule(self, num_iters: int | None = None) -> ContinuationSchedule:
        c = self.config
        return ContinuationSchedule(c["beta_start"], c["beta_end"], num_iters or c["num_iters"])

    def model(self, conds) -> DemuxModel:
        c = self.config
        w = c["penalty_weight"] / (c["nelx"] * c["nely"])
        return DemuxModel(self.layout, (conds["lambda1"], conds["lambda2"]), int(conds["blur_radius"]), w, c["eta"])

    def _simulate(self, design, conds):
        try:
            ev = self.model(conds).evaluate(design, self.config["beta_end"], gradient=False)
        except (ValueError, DesignBenchError) as exc:
            raise SimulationError(f"photonics simulation failed: {exc}") from exc
        return [ev.value]

    def fields(self, design, conds=None):
        """Field maps at both wavelengths and the permittivity, at the final projection strength."""
        ev = self.model(self.merge_conditions(conds)).evaluate(design, self.config["beta_end"], gradient=False)
        return ev.fields[0], ev.fields[1], ev.eps

    def _optimize(self, start, conds, num_iters=None, step_size=None, store_designs=False):
        c = self.config
        sched = self.schedule(num_iters)
        model = self.model(conds)
        # a grey uniform start binarizes arbitrarily once beta grows; start from seeded noise instead
        x = self.design_space.sample(self.np_random) if start is None else np.clip(np.asarray(start, float), 0.0, 1.0)
        adam = Adam(step_size or c["step_size"])
        history = OptHistory(designs=[] if store_designs else None)
        for t in range(sched.total_iters):
            beta = sched.beta(t)
            try:
                ev = model.evaluate(x, beta)
            except DesignBenchError as exc:
                history.final_variables = x
                raise SimulationError(f"solver failed at iteration {t}: {exc}", history) from exc
            history.append([ev.value], model.projected(x, beta) if store_designs else None, beta=beta)
            x = adam.update(x, ev.gradient)
        history.final_variables = x
        return x, history

    def _checks(self):
        return [
            Check("values", 0.0, 1.0, THEORY, ERROR, prefix="Design", value=design_entries),
            Check("nelx", 1, INF, THEORY, ERROR),
            Check("nely", 1, INF, THEORY, ERROR),
            Check("lambda1", 0.0, INF, THEORY, ERROR, lo_open=True),
            Check("lambda2", 0.0, INF, THEORY, ERROR, lo_open=True),
            Check("blur_radius", 0, INF, THEORY, ERROR),
            Check("lambda1", 0.5, INF, IMPLEMENTATION, ERROR),
            Check("lambda2", 0.5, INF, IMPLEMENTATION, ERROR),
            Check("blur_radius", 0, INF, IMPLEMENTATION, ERROR),
            Check("nelx", 60, INF, IMPLEMENTATION, ERROR, lo_open=True),
            Check("nely", 105, INF, IMPLEMENTATION, ERROR),
            Check("lambda1", 0.5, 1.5, IMPLEMENTATION, WARNING),
            Check("lambda2", 0.5, 1.5, IMPLEMENTATION, WARNING),
            Check("blur_radius", 0, 5, IMPLEMENTATION, WARNING),
            Check("nelx", 90, 200, IMPLEMENTATION, WARNING),
            Check("nely", 110, 300, IMPLEMENTATION, WARNING),
        ]

    def render_fields(self, design, conds=None, fmt: str = "pgm") -> bytes:
        """Three panels: field magnitude at each wavelength and the permittivity map."""
        from designbench.render import render_panels

        e1, e2, eps = self.fields(design, conds)
        return render_panels([np.abs(e1), np.abs(e2), eps - eps.min()], fmt)
