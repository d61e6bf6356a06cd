"""Scratch validation of the keystone discrete identities (not shipped)."""
import numpy as np
from fblin import (Grid, ScalarField, VectorField, build_grid, div, grad,
                   curl, inner_product, norm, project, divergence_defect)
from fblin.fields import OneForm, SymmetricTensorField
from fblin import operators as ops

rng = np.random.default_rng(0)


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


for n in (32, 64):
    grid = build_grid(n, n)
    o = grid.ops
    I = SymmetricTensorField.identity(grid)

    # 1. adjoint identity: (q, div V)_w = -(G0 q, V)_w  -- matrix check
    W = grid.r * grid.dr
    lhs = W[:, None] * o.div_radial_matrix
    rhs = -(o.grad0_radial.T * W[None, :]).T
    rhs = -o.grad0_radial.T * W[:, None]
    # careful: want diag(W) D = -G^T diag(W)
    M1 = W[:, None] * o.div_radial_matrix
    M2 = -(o.grad0_radial.T * W[None, :])
    # G^T diag(W): (G^T)_{ij} W_j  -> G.T * W[None,:]
    print(n, "adjoint matrix identity:", np.max(np.abs(M1 - M2)))

    # 2. quadrature Sum w = pi exactly
    print(n, "sum w - pi:", abs(np.sum(grid.w) - np.pi))

    # 3. curl(grad q) == 0
    q = ScalarField(grid, smooth_scalar(grid, 3))
    cg = curl(grad(q))
    print(n, "curl(grad q) max:", np.max(np.abs(cg.b12)))

    # 4. projection exactness
    U = smooth_vector(grid, 7)
    PU, lam = project(U)
    print(n, "div defect of PU:", divergence_defect(PU))
    PPU, lam2 = project(PU)
    print(n, "idempotence:", (PPU - PU).max_abs() / max(PU.max_abs(), 1e-30))
    print(n, "norm one:", norm(PU, I, grid) / norm(U, I, grid))
    Wt = project(smooth_vector(grid, 17))[0]
    orth = inner_product(Wt, U - PU, I, grid) / (norm(Wt, I, grid) * norm(U, I, grid))
    print(n, "orthogonality:", abs(orth))

    # 5. closed form P(y1, 0)
    U2 = VectorField(grid, grid.y1, np.zeros(grid.shape))
    PU2, _ = project(U2)
    target = VectorField(grid, grid.y1 / 2, -grid.y2 / 2)
    print(n, "closed-form projection err:", (PU2 - target).max_abs())

    # 6. rotation field and e1 exactly divergence-free
    S = VectorField(grid, -grid.y2, grid.y1)
    e1 = VectorField(grid, np.ones(grid.shape), np.zeros(grid.shape))
    print(n, "div defect S, e1:", divergence_defect(S), divergence_defect(e1))
    PS, _ = project(S)
    print(n, "P(S)=S err:", (PS - S).max_abs())

    # 7. div exactness examples
    print(n, "div((y1,0)) - 1 max:", np.max(np.abs(div(U2).data - 1.0)))

    # 8. grad closed form
    q0 = ScalarField(grid, (grid.y1**2 + grid.y2**2 - 1) / 4)
    gq = grad(q0)
    print(n, "grad closed form err:",
          max(np.max(np.abs(gq.c1 - grid.y1 / 2)), np.max(np.abs(gq.c2 - grid.y2 / 2))))

    # 9. curl of linear field = 2
    wS = OneForm(grid, -grid.y2, grid.y1)
    print(n, "curl(S) - 2 max:", np.max(np.abs(curl(wS).b12 - 2.0)))
