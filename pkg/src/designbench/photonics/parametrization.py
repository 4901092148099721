"""Density-to-permittivity mapping: disk blur followed by tanh projection."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp


def blur_matrix(shape: tuple[int, int], radius: int) -> sp.csr_matrix:
    """Row-normalized averaging over a disk of integer ``radius`` (row-major flattening)."""
    ny, nx = shape
    radius = int(radius)
    if radius < 0:
        raise ValueError("blur radius must be non-negative")
    iy, ix = np.meshgrid(np.arange(ny), np.arange(nx), indexing="ij")
    iy, ix = iy.ravel(), ix.ravel()
    rows, cols = [], []
    for dy in range(-radius, radius + 1):
        for dx in range(-radius, radius + 1):
            if dx * dx + dy * dy > radius * radius:
                continue
            ky, kx = iy + dy, ix + dx
            ok = (ky >= 0) & (ky < ny) & (kx >= 0) & (kx < nx)
            rows.append((iy * nx + ix)[ok])
            cols.append((ky * nx + kx)[ok])
    rows, cols = np.concatenate(rows), np.concatenate(cols)
    W = sp.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(nx * ny, nx * ny))
    counts = np.asarray(W.sum(axis=1)).ravel()
    return (sp.diags(1.0 / counts) @ W).tocsr()


def blur(x: np.ndarray, radius: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return (blur_matrix(x.shape, radius) @ x.ravel()).reshape(x.shape)


def tanh_projection(y, beta: float, eta: float = 0.5):
    y = np.asarray(y, dtype=float)
    num = np.tanh(beta * eta) + np.tanh(beta * (y - eta))
    return num / (np.tanh(beta * eta) + np.tanh(beta * (1 - eta)))


def tanh_projection_derivative(y, beta: float, eta: float = 0.5):
    y = np.asarray(y, dtype=float)
    return beta / np.cosh(beta * (y - eta)) ** 2 / (np.tanh(beta * eta) + np.tanh(beta * (1 - eta)))


@dataclass(frozen=True)
class ProjectionParams:
    beta: float = 1.0
    eta: float = 0.5
    blur_radius: int = 0

    def __post_init__(self):
        if self.beta < 1:
            raise ValueError("beta must be >= 1")
        if self.blur_radius < 0:
            raise ValueError("blur_radius must be >= 0")


def project(x, params: ProjectionParams) -> np.ndarray:
    """Blur then project a density grid; output lies in [0, 1]."""
    return tanh_projection(blur(x, params.blur_radius), params.beta, params.eta)


@dataclass(frozen=True)
class ContinuationSchedule:
    """Quadratic ramp ``beta(t) = start + (end - start) * (t / (T - 1))**2``."""

    beta_start: float = 1.0
    beta_end: float = 300.0
    total_iters: int = 100

    def beta(self, t: int) -> float:
        if self.total_iters <= 1:
            return self.beta_start
        frac = min(max(t, 0), self.total_iters - 1) / (self.total_iters - 1)
        return self.beta_start + (self.beta_end - self.beta_start) * frac**2

    def betas(self) -> np.ndarray:
        return np.array([self.beta(t) for t in range(self.total_iters)])
