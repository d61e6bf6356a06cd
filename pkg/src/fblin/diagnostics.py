"""Energies, correctors, curl seminorms, conserved quantities and the
gradient-estimate report.

Multi-indices run over the space-tangential family S plus the material
derivative.  Because D_t commutes with the static members, every index is
canonicalized with its D_t factors innermost, so a state jet list
(W, W', W'', ...) obtained from the equation covers all time entries;
time derivatives are never taken by differencing a trajectory.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from itertools import product

import numpy as np

from . import operators as ops
from .families import D_T, VectorFamily, lie_derive, lie_multi
from .fields import (OneForm, ScalarField, SymmetricTensorField, TwoForm,
                     VectorField, lower)
from .grid import Grid
from .normal_ops import apply_A, apply_Af, boundary_quadratic_form
from .projection import divergence_defect


# ---------------- multi-index bookkeeping ----------------

def tangential_indices(family: VectorFamily, r: int, include_dt: bool = True):
    """All multi-indices of length <= r over S (plus D_t), deduplicated by
    moving the commuting D_t entries innermost."""
    labels = [m.label for m in family.s]
    if include_dt:
        labels = labels + [D_T]
    seen = set()
    out = []
    for length in range(r + 1):
        for combo in product(labels, repeat=length):
            canon = _canonical(combo)
            if canon not in seen:
                seen.add(canon)
                out.append(canon)
    return out


def _canonical(index) -> tuple:
    spatial = tuple(l for l in index if l != D_T)
    k = len(index) - len(spatial)
    return spatial + (D_T,) * k


def _split_index(index):
    """Ordered subsequence splittings I = I1 + I2 (I1 nonempty)."""
    r = len(index)
    for mask in range(1, 1 << r):
        i1 = tuple(index[i] for i in range(r) if mask >> i & 1)
        i2 = tuple(index[i] for i in range(r) if not mask >> i & 1)
        yield i1, i2


# ---------------- state jets ----------------

def state_jets(W: VectorField, Wdot: VectorField, b, grid: Grid,
               order: int, F_jets=()):
    """(W, W', W'', ...) up to the requested order using the equation.

    Valid for backgrounds whose operators are static in time (the shipped
    ones); the recursion is W^(k+2) = F^(k) - A W^(k) - Gdot W^(k+1)
    + C W^(k+1).
    """
    from .evolution import rhs_acceleration
    jets = [W, Wdot]
    for k in range(order - 1):
        F_k = F_jets[k] if k < len(F_jets) else None
        jets.append(rhs_acceleration(jets[k], jets[k + 1], F_k, b, grid))
    return jets


def _index_field(index, jets, family, grid):
    """L_T^I applied to the state, D_t entries resolved through the jets."""
    k = sum(1 for l in index if l == D_T)
    spatial = [family.by_label(l) for l in index if l != D_T]
    if k + 1 >= len(jets) + 1:
        pass
    return lie_multi(spatial, jets[k], grid=grid)


def _index_scalar(index, b, family, grid) -> ScalarField:
    """T^I p with D_t entries resolved through the background jets."""
    k = sum(1 for l in index if l == D_T)
    f = b.p_jet(k)
    for l in reversed([l for l in index if l != D_T]):
        m = family.by_label(l)
        f = ScalarField(grid, m.directional(f.data))
    return f


# ---------------- energies ----------------

def energy_base(state, b, grid: Grid) -> float:
    """<W',W'> + <W,(A+I)W>, the A part through the boundary form."""
    g = b.g
    e = ops.inner_product(state.Wdot, state.Wdot, g, grid)
    e += ops.inner_product(state.W, state.W, g, grid)
    e += boundary_quadratic_form(state.W, state.W, b.p, b, grid)
    return e


def _energy_of(Wf, Wdotf, b, grid) -> float:
    g = b.g
    return (ops.inner_product(Wdotf, Wdotf, g, grid)
            + ops.inner_product(Wf, Wf, g, grid)
            + boundary_quadratic_form(Wf, Wf, b.p, b, grid))


@dataclass
class TangentialEnergies:
    E_I: dict
    D_I: dict
    E_r_T: float
    by_order: dict


def energy_tangential(state, family: VectorFamily, r: int, b, grid: Grid,
                      F_jets=(), interior_correctors: bool = False
                      ) -> TangentialEnergies:
    """E_I and the correctors D_I for |I| <= r over S u {D_t}."""
    if r > 3:
        raise ValueError("tangential energies capped at r <= 3")
    jets = state_jets(state.W, state.Wdot, b, grid, r + 1, F_jets=F_jets)
    indices = tangential_indices(family, r)
    E, D = {}, {}
    by_order = {}
    for index in indices:
        W_I = _index_field(index, jets, family, grid)
        Wd_I = _index_field(index, jets[1:], family, grid)
        E[index] = _energy_of(W_I, Wd_I, b, grid)
        d_val = 0.0
        for i1, i2 in _split_index(index):
            f1 = _index_scalar(i1, b, family, grid)
            if f1.max_abs() == 0.0:
                continue
            W_I2 = _index_field(i2, jets, family, grid)
            if interior_correctors:
                AW = apply_Af(f1, W_I2, b, grid, check=False)[0]
                d_val += 2.0 * ops.inner_product(W_I, AW, b.g, grid)
            else:
                d_val += 2.0 * boundary_quadratic_form(W_I, W_I2, f1, b, grid)
        D[index] = d_val
        by_order.setdefault(len(index), []).append(index)
    e_rt = float(sum(np.sqrt(max(v, 0.0)) for v in E.values()))
    return TangentialEnergies(E_I=E, D_I=D, E_r_T=e_rt, by_order=by_order)


def curl_seminorms(state, family: VectorFamily, r: int, b, grid: Grid,
                   F_jets=()):
    """C_r^V over V = S u {D_t} plus the mixed norms |W|_r^V.

    C_0 = 0 by convention; for r >= 1 the sum runs over |J| <= r - 1 of
    the quadrature norms of curl L^J w' and curl L^J w (w = lowered W).
    """
    if r > 3:
        raise ValueError("curl seminorms capped at r <= 3")
    o = grid.ops
    if r == 0:
        return 0.0, _mixed_norm(state, family, 0, b, grid)
    jets = state_jets(state.W, state.Wdot, b, grid, r + 1, F_jets=F_jets)
    total = 0.0
    for index in tangential_indices(family, r - 1):
        k = sum(1 for l in index if l == D_T)
        spatial = [family.by_label(l) for l in index if l != D_T]
        w = lower(lie_multi(spatial, jets[k], grid=grid), b.g)
        wd = lower(lie_multi(spatial, jets[k + 1], grid=grid), b.g)
        cw = ops.two_form_norm(o.curl(w), grid)
        cwd = ops.two_form_norm(o.curl(wd), grid)
        total += float(np.sqrt(cw ** 2 + cwd ** 2))
    return total, _mixed_norm(state, family, r, b, grid, jets=jets)


def _mixed_norm(state, family, r, b, grid, jets=None):
    if jets is None:
        jets = state_jets(state.W, state.Wdot, b, grid, max(r, 1))
    total = 0.0
    for index in tangential_indices(family, r):
        k = sum(1 for l in index if l == D_T)
        if k >= len(jets):
            continue
        W_I = _index_field(index, jets, family, grid)
        total += ops.norm(W_I, b.g, grid)
    return float(total)


def revisited_seminorm(state, family: VectorFamily, r: int, b, grid: Grid,
                       interior: bool = False) -> float:
    """Sum over |I| <= r, I in S of <L^I W, A L^I W>^{1/2}."""
    total = 0.0
    for index in tangential_indices(family, r, include_dt=False):
        spatial = [family.by_label(l) for l in index]
        W_I = lie_multi(spatial, state.W, grid=grid)
        if interior:
            AW = apply_A(W_I, b, grid)[0]
            val = ops.inner_product(W_I, AW, b.g, grid)
        else:
            val = boundary_quadratic_form(W_I, W_I, b.p, b, grid)
        total += float(np.sqrt(max(val, 0.0)))
    return total


def bound_coefficient(b, grid: Grid) -> float:
    """n(t) = 1 + |g_dot|_inf + |grad_N p_dot / grad_N p|_inf,boundary."""
    gd = b.g_dot
    g_inv = b.g_inv
    # raised Frobenius norm of g_dot
    a11 = g_inv.t11 * gd.t11 + g_inv.t12 * gd.t12
    a12 = g_inv.t11 * gd.t12 + g_inv.t12 * gd.t22
    a21 = g_inv.t12 * gd.t11 + g_inv.t22 * gd.t12
    a22 = g_inv.t12 * gd.t12 + g_inv.t22 * gd.t22
    norm_gd = float(np.max(np.sqrt(a11 ** 2 + a12 ** 2 + a21 ** 2
                                   + a22 ** 2)))
    o = grid.ops
    dpn = o.boundary_trace(o.d_r(b.p.data))
    dpdn = o.boundary_trace(o.d_r(b.p_dot.data))
    ratio = float(np.max(np.abs(dpdn / dpn))) if np.all(dpn != 0.0) else 0.0
    return 1.0 + norm_gd + ratio


# ---------------- conserved curl ----------------

def curl_invariant(state, b, grid: Grid) -> TwoForm:
    """curl(w' - omega . W), conserved by the flow when curl F = 0."""
    dz = lower(state.Wdot, b.g) - b.omega.contract(state.W)
    return grid.ops.curl(dz)


def conserved_curl(trajectory, provider, grid: Grid):
    """Drift series ||curl dz(t) - curl dz(0)|| and its maximum."""
    drifts = []
    base = None
    for st in trajectory.states:
        b = provider.at(st.t) if not provider.static_operators \
            else provider.at(0.0)
        c = curl_invariant(st, b, grid)
        if base is None:
            base = c
        drifts.append(ops.two_form_norm(c - base, grid))
    return drifts, float(max(drifts))


# ---------------- gradient estimate ----------------

@dataclass
class GradientRatioReport:
    max_ratio: float
    mean_ratio: float


def gradient_estimate_report(W: VectorField, family: VectorFamily, b,
                             grid: Grid) -> GradientRatioReport:
    """Pointwise |dW| against the tangential/curl/divergence majorant."""
    o = grid.ops
    dxx, dxy, dyx, dyy = o.jacobian(W)
    num = np.sqrt(dxx ** 2 + dxy ** 2 + dyx ** 2 + dyy ** 2)
    w = lower(W, b.g)
    major = np.abs(o.curl(w).b12) + np.abs(o.div(W).data)
    for m in family.s:
        LW = lie_derive(m, W, b=b, grid=grid)
        major += np.sqrt(LW.c1 ** 2 + LW.c2 ** 2)
    gfac = _g_bracket(b, grid)
    major += gfac * np.sqrt(W.c1 ** 2 + W.c2 ** 2)
    ratio = num / np.maximum(major, 1e-300)
    return GradientRatioReport(max_ratio=float(np.max(ratio)),
                               mean_ratio=float(np.mean(ratio)))


def _g_bracket(b, grid) -> np.ndarray:
    """[g]_1 = 1 + |dg| pointwise."""
    o = grid.ops
    total = np.zeros(grid.shape)
    for comp in (b.g.t11, b.g.t12, b.g.t22):
        fr = o.d_r(comp)
        ft = o.d_theta(comp) / grid.r[:, None]
        total += fr ** 2 + ft ** 2
    return 1.0 + np.sqrt(total)


# ---------------- energy bound check ----------------

@dataclass
class BoundCheck:
    name: str
    measured: float
    bound: float
    passed: bool

    def as_dict(self):
        return {"name": self.name, "measured": self.measured,
                "bound": self.bound, "pass": self.passed}


def energy_bound_check(times, energies, f_norms, provider, grid: Grid,
                       tol: float = 1e-2,
                       tangential=None, f_tang_norms=None) -> list:
    """Check sqrt(E)(t) <= e^{int n}(sqrt(E)(0) + int |F|)(1 + tol).

    ``energies`` holds E(t); ``f_norms`` the metric norm of the forcing at
    the same times.  When ``tangential`` (values of E_r^T) is supplied for
    a lifted run, the forced-bound shape is reported with its empirical
    constant.
    """
    times = np.asarray(times, dtype=float)
    E0 = np.sqrt(np.maximum(np.asarray(energies, dtype=float), 0.0))
    checks = []
    n_vals = np.array([bound_coefficient(provider.at(t), grid)
                       for t in times])
    int_n = _cumtrapz(n_vals, times)
    int_f = _cumtrapz(np.asarray(f_norms, dtype=float), times)
    rhs = np.exp(int_n) * (E0[0] + int_f) * (1.0 + tol)
    margin = float(np.min(rhs - E0))
    checks.append(BoundCheck("energy-bound", float(np.max(E0 / np.maximum(
        np.exp(int_n) * (E0[0] + int_f), 1e-300))), 1.0 + tol,
        margin >= 0.0))
    if tangential is not None:
        tang = np.asarray(tangential, dtype=float)
        int_ft = _cumtrapz(np.asarray(f_tang_norms, dtype=float), times)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.where(int_ft > 1e-14, tang / int_ft, 0.0)
        c_emp = float(np.max(ratios)) if len(ratios) else 0.0
        checks.append(BoundCheck("forced-tangential-bound", c_emp,
                                 float("inf"), np.isfinite(c_emp)))
    return checks


def _cumtrapz(y, x):
    out = np.zeros_like(y)
    if len(y) > 1:
        out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(x))
    return out


# ---------------- full report ----------------

@dataclass
class EnergyReport:
    E: float
    E_I: dict
    D_I: dict
    E_r_T: float
    C_r: float
    mixed_norm: float
    seminorm_A: float
    n_t: float
    r: int

    def as_dict(self):
        return {
            "E": self.E,
            "E_I": {"+".join(k) if k else "()": v
                    for k, v in self.E_I.items()},
            "D_I": {"+".join(k) if k else "()": v
                    for k, v in self.D_I.items()},
            "E_r_T": self.E_r_T,
            "C_r": self.C_r,
            "mixed_norm": self.mixed_norm,
            "seminorm_A": self.seminorm_A,
            "n_t": self.n_t,
            "r": self.r,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True, **kw)


def energy_report(state, family: VectorFamily, r: int, b, grid: Grid,
                  F_jets=()) -> EnergyReport:
    tang = energy_tangential(state, family, r, b, grid, F_jets=F_jets)
    c_r, mixed = curl_seminorms(state, family, r, b, grid, F_jets=F_jets)
    sem = revisited_seminorm(state, family, min(r, 1), b, grid)
    return EnergyReport(
        E=energy_base(state, b, grid),
        E_I=tang.E_I, D_I=tang.D_I, E_r_T=tang.E_r_T,
        C_r=c_r, mixed_norm=mixed, seminorm_A=sem,
        n_t=bound_coefficient(b, grid), r=r)
