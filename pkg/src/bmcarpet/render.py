"""Raster image of a carpet from its level-N approximate squares."""
from __future__ import annotations

import math

import numpy as np

from bmcarpet.carpet import CarpetSpec, ValidationError, ceil_level

MAX_CELLS = 200_000_000


def render_depth(m: int, size: int) -> int:
    """Smallest N with m^-N <= 1/size."""
    N = 1
    while m**N < size:
        N += 1
    return N


def cell_mask(carpet: CarpetSpec, N: int) -> np.ndarray:
    """Occupancy of the (m^N rows) x (n^ceil(sigma N) columns) grid of level-N cells; row 0 is y = 0."""
    m, n = carpet.m, carpet.n
    c = ceil_level(carpet.sigma, N)
    if m**N * n**c > MAX_CELLS:
        raise ValidationError("size", f"level {N} needs {m**N * n**c} cells, above {MAX_CELLS}")
    pattern = np.zeros((m, n), dtype=bool)
    for i, j in carpet.digits:
        pattern[i, j] = True
    occupied_rows = pattern.any(axis=1)[:, None]
    mask = np.ones((1, 1), dtype=bool)
    for _ in range(c):
        mask = np.kron(mask, pattern).astype(bool)
    for _ in range(N - c):
        mask = np.kron(mask, occupied_rows).astype(bool)
    return mask


def rasterize(carpet: CarpetSpec, size: int) -> np.ndarray:
    """size x size uint8 image: 0 where a pixel meets a level-N approximate square, 255 elsewhere.

    N is the smallest depth with m^-N at most the pixel size, so every cell fits
    inside a 2 x 2 block of pixels. Image row 0 is the top edge (y = 1).
    """
    if size < 1:
        raise ValidationError("size", f"image size must be positive, got {size}")
    N = render_depth(carpet.m, size)
    mask = cell_mask(carpet, N)
    rows_total, cols_total = mask.shape
    Y, X = np.nonzero(mask)
    x0 = (X * size) // cols_total
    x1 = np.minimum(-((-(X + 1) * size) // cols_total) - 1, size - 1)
    y0 = (Y * size) // rows_total
    y1 = np.minimum(-((-(Y + 1) * size) // rows_total) - 1, size - 1)
    hit = np.zeros((size, size), dtype=bool)
    for ys in (y0, y1):
        for xs in (x0, x1):
            hit[ys, xs] = True
    image = np.full((size, size), 255, dtype=np.uint8)
    image[hit[::-1]] = 0
    return image


def coverage_fraction(image: np.ndarray) -> float:
    return float(np.count_nonzero(image == 0)) / image.size if image.size else math.nan
