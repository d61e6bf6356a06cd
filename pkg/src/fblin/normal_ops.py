"""The normal operator A_f, its collar regularization A_f^eps, and the
projected multiplication operators M_alpha.

A_f W = P(-g^{-1} grad((d_c f) W^c)) for f vanishing on the boundary; the
projection potential doubles as the paper-side pressure correction, so one
elliptic solve covers an application.  The regularized operator acts
through the collar profile: its one-form is supported where chi_eps' is
nonzero and is purely radial, which makes the quadratic form pointwise
symmetric and its curl vanish identically outside the collar.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import operators as ops
from .cutoffs import CutoffProfiles, collar_fields, rho_of_d, rho_prime_of_d
from .families import D_T, FamilyMember, lie_derive
from .fields import (OneForm, ScalarField, SymmetricTensorField, TwoForm,
                     VectorField, lower)
from .grid import Grid
from .projection import divergence_defect, projector_for
from .random_fields import random_divergence_free


@dataclass
class RegularizationParams:
    """Smoothing length and the profile handles that go with it."""

    eps: float
    d0: float = 0.5
    profiles: CutoffProfiles = field(init=False)

    def __post_init__(self):
        if not (0.0 < self.eps <= self.d0 / 2.0):
            raise ValueError(
                f"eps must lie in (0, {self.d0 / 2}], got {self.eps}")
        self.profiles = CutoffProfiles(self.eps)


def _check_boundary_vanishing(f: ScalarField, tol: float = 1e-8) -> None:
    # The trace is quadratic extrapolation, exact only on low-degree radial
    # profiles, so allow the O(h^2) headroom a smooth vanishing f can need.
    trace = f.grid.ops.boundary_trace(f.data)
    scale = max(1.0, float(np.max(np.abs(f.data))))
    allow = max(tol, 5.0 * f.grid.dr ** 2)
    if np.max(np.abs(trace)) > allow * scale:
        raise ValueError("f must vanish on the boundary r = 1")


def apply_Af(f: ScalarField, W: VectorField, b, grid: Grid,
             check: bool = True):
    """A_f W and the potential q of its projection step."""
    if check:
        _check_boundary_vanishing(f)
    o = grid.ops
    df = o.grad(f)
    h = ScalarField(grid, df.c1 * W.c1 + df.c2 * W.c2)
    dh = o.grad(h)
    pre = OneForm(grid, -dh.c1, -dh.c2)
    V = _raise(pre, b, grid)
    P = projector_for(grid)
    if b is None or _flat(b):
        return P.project(V)
    return P.project(V, g=b.g, g_inv=b.g_inv)


def apply_A(W: VectorField, b, grid: Grid):
    """The normal operator A = A_p of the background."""
    return apply_Af(b.p, W, b, grid, check=False)


def boundary_quadratic_form(U: VectorField, W: VectorField, f: ScalarField,
                            b, grid: Grid) -> float:
    """Circle integral of (-grad_N f) U_N W_N kappa, extrapolated traces."""
    o = grid.ops
    un = o.boundary_trace(U.r_hat())
    wn = o.boundary_trace(W.r_hat())
    dfn = o.boundary_trace(o.d_r(f.data))
    kap = o.boundary_trace(b.kappa.data) if b is not None else 1.0
    return float(np.sum(grid.boundary_w * (-dfn) * un * wn * kap))


def apply_Af_eps(f: ScalarField, W: VectorField, reg: RegularizationParams,
                 b, grid: Grid, check: bool = True):
    """Collar-regularized operator, pre-projection form
    chi_eps'(rho) f rho^{-1} (W . drho) drho."""
    if check:
        _check_boundary_vanishing(f)
    pre = _eps_one_form(f, W, reg, grid)
    V = _raise(pre, b, grid)
    P = projector_for(grid)
    if b is None or _flat(b):
        return P.project(V)
    return P.project(V, g=b.g, g_inv=b.g_inv)


def _eps_one_form(f, W, reg, grid) -> OneForm:
    rho, rho_p, chi_p = collar_fields(grid, reg.eps)
    # d rho = rho'(d) * grad d = -rho'(d) * r_hat (purely radial)
    wn = W.r_hat()
    coeff = (chi_p * rho_p ** 2 / rho)[:, None] * f.data * wn
    return OneForm.from_polar(grid, coeff, np.zeros(grid.shape))


def eps_quadratic_form(f: ScalarField, U: VectorField, W: VectorField,
                       reg: RegularizationParams, grid: Grid) -> float:
    """The pointwise-symmetric integrand of the regularized form."""
    rho, rho_p, chi_p = collar_fields(grid, reg.eps)
    dens = (chi_p * rho_p ** 2 / rho)[:, None] * f.data \
        * U.r_hat() * W.r_hat()
    return float(np.sum(grid.w * dens))


def apply_mult(alpha, W: VectorField, b, grid: Grid) -> VectorField:
    """M_alpha W = P(g^{-1} alpha . W) for two-forms and symmetric
    tensors."""
    if isinstance(alpha, (TwoForm, SymmetricTensorField)):
        if alpha.max_abs() == 0.0 or W.max_abs() == 0.0:
            z = np.zeros(grid.shape)
            return VectorField(grid, z, z.copy())
        form = alpha.contract(W)
    else:
        raise TypeError("alpha must be a TwoForm or SymmetricTensorField")
    V = _raise(form, b, grid)
    P = projector_for(grid)
    if b is None or _flat(b):
        return P.project(V)[0]
    return P.project(V, g=b.g, g_inv=b.g_inv)[0]


def _raise(form: OneForm, b, grid: Grid) -> VectorField:
    if b is None or _flat(b):
        return VectorField(grid, form.c1, form.c2)
    return b.g_inv.raise_form(form)


def _flat(b) -> bool:
    g = b.g
    return (np.all(g.t11 == 1.0) and np.all(g.t12 == 0.0)
            and np.all(g.t22 == 1.0))


# ---------------- commutator diagnostics ----------------

def commutator_residual(T: FamilyMember, f: ScalarField, W: VectorField,
                        b, grid: Grid,
                        use_eps: float | None = None,
                        d0: float = 0.5) -> float:
    """Quadrature norm of P(L_T(A_f W)-form) - A_f(L_T W) - A_{Tf} W.

    All three terms are handled as one-forms (lowered with the metric);
    with ``use_eps`` the regularized operator replaces A_f throughout.
    """
    if T == D_T or not T.tangential:
        raise ValueError("commutator check needs a space-tangential member")
    o = grid.ops
    P = projector_for(grid)
    g = b.g if b is not None else None

    if use_eps is None:
        def A(field_w):
            return apply_Af(f, field_w, b, grid, check=True)
    else:
        reg = RegularizationParams(use_eps, d0=d0)

        def A(field_w):
            return apply_Af_eps(f, field_w, reg, b, grid, check=True)

    AW, _ = A(W)
    AW_form = _lower(AW, b, grid)
    lhs_form = lie_derive(T, AW_form, b=b, grid=grid)
    # project the Lie-derived one-form
    lhs_vec = _raise(lhs_form, b, grid)
    if b is None or _flat(b):
        lhs_proj = P.project(lhs_vec)[0]
    else:
        lhs_proj = P.project(lhs_vec, g=b.g, g_inv=b.g_inv)[0]
    lhs = _lower(lhs_proj, b, grid)

    LTW = lie_derive(T, W, b=b, grid=grid)
    ALTW = _lower(A(LTW)[0], b, grid)

    tf = ScalarField(grid, T.directional(f.data))
    ATfW = _lower(A_for_f(tf, W, b, grid, use_eps, d0), b, grid)

    res = lhs - ALTW - ATfW
    g_inv = b.g_inv if b is not None else SymmetricTensorField.identity(grid)
    return ops.form_norm(res, g_inv, grid)


def A_for_f(f, W, b, grid, use_eps, d0=0.5):
    if use_eps is None:
        return apply_Af(f, W, b, grid, check=True)[0]
    reg = RegularizationParams(use_eps, d0=d0)
    return apply_Af_eps(f, W, reg, b, grid, check=True)[0]


def _lower(V: VectorField, b, grid: Grid) -> OneForm:
    if b is None or _flat(b):
        return OneForm(grid, V.c1, V.c2)
    return lower(V, b.g)


# ---------------- operator norm ----------------

def estimate_operator_norm(apply_op, grid: Grid, b=None, iters: int = 50,
                           seed: int = 0) -> float:
    """Largest eigenvalue of a symmetric positive operator on
    divergence-free fields, by power iteration from a fixed seed field."""
    g = b.g if b is not None else SymmetricTensorField.identity(grid)
    Z = random_divergence_free(grid, seed)
    lam = 0.0
    for _ in range(iters):
        AZ = apply_op(Z)
        num = ops.inner_product(Z, AZ, g, grid)
        den = ops.inner_product(Z, Z, g, grid)
        lam = abs(num / den)
        nrm = ops.norm(AZ, g, grid)
        if nrm == 0.0:
            return 0.0
        Z = (1.0 / nrm) * AZ
    return lam
