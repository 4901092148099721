"""Cone-weighted density filter."""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp


class DensityFilter:
    """Linear density filter with weights ``max(0, rmin - dist)``.

    Operates on column-major flattened element vectors of a
    ``(nely, nelx)`` grid.  ``apply`` maps design variables to physical
    densities; ``backward`` chains a gradient w.r.t. physical densities back
    to the design variables.
    """

    def __init__(self, nelx: int, nely: int, rmin: float):
        if rmin <= 0:
            raise ValueError("rmin must be positive")
        self.nelx, self.nely, self.rmin = nelx, nely, float(rmin)
        reach = int(np.ceil(rmin)) - 1
        offsets = [(di, dj) for di in range(-reach, reach + 1) for dj in range(-reach, reach + 1)]
        elx, ely = np.meshgrid(np.arange(nelx), np.arange(nely), indexing="ij")
        elx, ely = elx.ravel(), ely.ravel()
        rows, cols, vals = [], [], []
        for di, dj in offsets:
            w = rmin - np.hypot(di, dj)
            if w <= 0:
                continue
            kx, ky = elx + di, ely + dj
            ok = (kx >= 0) & (kx < nelx) & (ky >= 0) & (ky < nely)
            rows.append((elx * nely + ely)[ok])
            cols.append((kx * nely + ky)[ok])
            vals.append(np.full(ok.sum(), w))
        n = nelx * nely
        self.H = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
        self.Hs = np.asarray(self.H.sum(axis=1)).ravel()

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.H @ x / self.Hs

    def backward(self, grad: np.ndarray) -> np.ndarray:
        return self.H.T @ (grad / self.Hs)

    def __repr__(self) -> str:
        return f"DensityFilter(nelx={self.nelx}, nely={self.nely}, rmin={self.rmin:g})"


def density_filter(field2d, rmin: float) -> np.ndarray:
    """Filter a ``(nely, nelx)`` array; returns an array of the same shape."""
    field2d = np.asarray(field2d, dtype=float)
    nely, nelx = field2d.shape
    flt = DensityFilter(nelx, nely, rmin)
    return flt.apply(field2d.ravel(order="F")).reshape((nely, nelx), order="F")
