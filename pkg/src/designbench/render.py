"""Binary PGM (P5) and SVG renders of density fields and multi-panel field plots."""
from __future__ import annotations

from typing import Sequence

import numpy as np

FORMATS = ("pgm", "svg")


def _as_image(field: np.ndarray) -> np.ndarray:
    a = np.asarray(field, dtype=float)
    if a.ndim == 1:
        a = a[None, :]
    if a.ndim != 2:
        raise ValueError(f"expected a 1-D or 2-D field, got shape {a.shape}")
    return a


def _gray(density: np.ndarray) -> np.ndarray:
    # material (1) is black, void (0) white
    return np.round(255 * (1.0 - np.clip(density, 0.0, 1.0))).astype(np.uint8)


def pgm(gray: np.ndarray) -> bytes:
    h, w = gray.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + np.ascontiguousarray(gray, dtype=np.uint8).tobytes()


def svg(gray: np.ndarray, cell: int = 4) -> bytes:
    h, w = gray.shape
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w * cell}" height="{h * cell}" '
             f'viewBox="0 0 {w} {h}" shape-rendering="crispEdges">']
    for i in range(h):
        for j in range(w):
            g = int(gray[i, j])
            if g == 255:
                continue
            parts.append(f'<rect x="{j}" y="{i}" width="1" height="1" fill="rgb({g},{g},{g})"/>')
    parts.append("</svg>\n")
    return "\n".join(parts).encode("ascii")


def render_density(density, fmt: str = "pgm") -> bytes:
    """Image with one pixel per design entry; a ``(rows, cols)`` design gives a cols x rows image."""
    gray = _gray(_as_image(density))
    return _encode(gray, fmt)


def _encode(gray, fmt):
    if fmt == "pgm":
        return pgm(gray)
    if fmt == "svg":
        return svg(gray)
    raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")


def render_panels(panels: Sequence[np.ndarray], fmt: str = "pgm", gap: int = 4) -> bytes:
    """Side-by-side panels, each scaled to its own maximum (values in ``[0, max]`` map to white..black)."""
    imgs = []
    for p in panels:
        a = _as_image(np.abs(p))
        top = a.max()
        imgs.append(_gray(a / top if top > 0 else a))
    h = max(i.shape[0] for i in imgs)
    w = sum(i.shape[1] for i in imgs) + gap * (len(imgs) - 1)
    canvas = np.full((h, w), 255, dtype=np.uint8)
    x = 0
    for img in imgs:
        canvas[: img.shape[0], x:x + img.shape[1]] = img
        x += img.shape[1] + gap
    return _encode(canvas, fmt)
