"""Measure the discrete symmetry defect of A_f (not shipped)."""
import numpy as np
from fblin import (ScalarField, VectorField, build_grid, grad, inner_product,
                   norm, project)
from fblin.fields import SymmetricTensorField


def smooth_scalar(grid, seed=0, deg=4):
    r = np.random.default_rng(seed)
    c = r.standard_normal((deg + 1, deg + 1))
    out = np.zeros(grid.shape)
    for p in range(deg + 1):
        for q in range(deg + 1 - p):
            out += c[p, q] * grid.y1 ** p * grid.y2 ** q
    return out


def smooth_vector(grid, seed=0, deg=4):
    return VectorField(grid, smooth_scalar(grid, seed, deg),
                       smooth_scalar(grid, seed + 1000, deg))


def apply_A(W, grid):
    # rigid rotation Omega=1: h_W = dp.W = -(y1 W1 + y2 W2)
    h = ScalarField(grid, -(grid.y1 * W.c1 + grid.y2 * W.c2))
    dh = grad(h)
    V = VectorField(grid, -dh.c1, -dh.c2)
    return project(V)[0]


for n in (32, 64, 128):
    grid = build_grid(n, n)
    I = SymmetricTensorField.identity(grid)
    defects = []
    pos = []
    for s in range(8):
        U = project(smooth_vector(grid, 100 + s))[0]
        W = project(smooth_vector(grid, 200 + s))[0]
        AU, AW = apply_A(U, grid), apply_A(W, grid)
        d = inner_product(U, AW, I, grid) - inner_product(AU, W, I, grid)
        defects.append(abs(d) / (norm(U, I, grid) * norm(W, I, grid)))
        pos.append(inner_product(W, AW, I, grid) / norm(W, I, grid) ** 2)
    print(n, "sym defect max:", max(defects), " min <W,AW>/|W|^2:", min(pos))
    # exact examples
    e1 = VectorField(grid, np.ones(grid.shape), np.zeros(grid.shape))
    Ae1 = apply_A(e1, grid)
    print(n, "A e1 - e1 max:", (Ae1 - e1).max_abs())
    S = VectorField(grid, -grid.y2, grid.y1)
    print(n, "A S max:", apply_A(S, grid).max_abs())
    print(n, "<e1,Ae1> - pi:", inner_product(e1, Ae1, I, grid) - np.pi)
