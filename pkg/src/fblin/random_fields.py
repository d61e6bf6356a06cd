"""Seeded smooth random fields for property tests and norm estimates.

Fields are low-degree polynomials in the Cartesian coordinates, so they
are smooth across the origin, band-limited in theta (degree <= deg), and
free of aliasing in products up to the Nyquist mode on all grids used.
"""

from __future__ import annotations

import numpy as np

from .fields import ScalarField, VectorField
from .grid import Grid


def random_scalar(grid: Grid, seed: int, deg: int = 4,
                  normalize: bool = True) -> ScalarField:
    rng = np.random.default_rng(seed)
    coeffs = rng.standard_normal((deg + 1, deg + 1))
    out = np.zeros(grid.shape)
    for p in range(deg + 1):
        for q in range(deg + 1 - p):
            out += coeffs[p, q] * grid.y1 ** p * grid.y2 ** q
    if normalize:
        scale = np.max(np.abs(out)) or 1.0
        out = out / scale
    return ScalarField(grid, out)


def random_vector(grid: Grid, seed: int, deg: int = 4,
                  normalize: bool = True) -> VectorField:
    a = random_scalar(grid, seed * 2 + 1, deg, normalize)
    b = random_scalar(grid, seed * 2 + 2, deg, normalize)
    return VectorField(grid, a.data, b.data)


def random_divergence_free(grid: Grid, seed: int, deg: int = 4) -> VectorField:
    from .projection import projector_for
    U = random_vector(grid, seed, deg)
    W, _ = projector_for(grid).project(U)
    return W
