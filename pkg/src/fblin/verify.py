"""The invariant battery behind the verify command.

Each check returns (name, measured, bound, pass/skip).  Bounds are either
structural round-off allowances (identities that hold exactly in this
discretization) or discretization-order allowances scaled with the grid;
order measurements across resolutions live in the converge command, not
here.  Checks that need a minimum resolution report themselves as skipped
below it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import operators as ops
from .background import rigid_rotation_background, validate_background
from .cutoffs import cutoff_profiles
from .datalift import assemble_series, jet_recursion
from .diagnostics import curl_invariant, energy_base
from .elliptic import solve_dirichlet
from .evolution import EvolveConfig, Evolver, State, rhs_acceleration
from .families import build_families, lie_derive
from .fields import (OneForm, ScalarField, SymmetricTensorField, TwoForm,
                     VectorField, lower)
from .grid import Grid
from .normal_ops import (RegularizationParams, apply_A, apply_Af,
                         apply_Af_eps, apply_mult, boundary_quadratic_form,
                         eps_quadratic_form)
from .projection import divergence_defect, projector_for
from .random_fields import random_divergence_free, random_vector


@dataclass
class CheckResult:
    name: str
    measured: float
    bound: float
    passed: bool
    skipped: bool = False
    note: str = ""

    def as_dict(self):
        out = {"name": self.name, "measured": self.measured,
               "bound": self.bound, "pass": bool(self.passed or self.skipped)}
        if self.skipped:
            out["skipped"] = True
        if self.note:
            out["note"] = self.note
        return out


def _check(name, measured, bound):
    return CheckResult(name, float(measured), float(bound),
                       float(measured) <= float(bound))


def _skip(name, note):
    return CheckResult(name, float("nan"), float("nan"), True, skipped=True,
                       note=note)


def run_battery(grid: Grid, omega: float = 1.0, seed: int = 0,
                fault_inject: str = "none"):
    """Full invariant battery; returns a list of CheckResult."""
    checks = []
    h = grid.dr
    prov = rigid_rotation_background(omega, grid)
    b = prov.at(0.0)
    fam = build_families(0.5, 1.0, grid)
    I2 = SymmetricTensorField.identity(grid)
    P = projector_for(grid)

    def A_apply(W):
        out = apply_A(W, b, grid)[0]
        if fault_inject == "a_sign_flip":
            out = -1.0 * out
        return out

    # ---- grid and quadrature ----
    checks.append(_check("quadrature-sum", abs(np.sum(grid.w) - np.pi),
                         1e-3))

    # ---- background ----
    rep = validate_background(b, grid)
    checks.append(CheckResult("background-sign-condition", rep.c0, 0.0,
                              rep.sign_condition_ok))
    checks.append(_check("background-kappa", rep.volume_residual, 1e-10))
    checks.append(_check("background-boundary-p", rep.boundary_p, 1e-10))

    # ---- differential identities ----
    q = random_vector(grid, seed + 1, deg=4)
    qs = ScalarField(grid, q.c1)
    cg = grid.ops.curl(grid.ops.grad(qs))
    checks.append(_check("curl-grad-zero", np.max(np.abs(cg.b12)), 1e-8))
    S0 = fam.s0[0]
    checks.append(_check("div-rotation", divergence_defect(S0.field, b),
                         1e-10))
    checks.append(_check(
        "div-radial-field",
        float(np.max(np.abs(ops.div(fam.r.field).data - 2.0 * fam.c1))),
        1e-10))

    # ---- cutoff profiles ----
    d = ScalarField(grid, np.broadcast_to(grid.d[:, None], grid.shape))
    rho, chi_e, chi_p = cutoff_profiles(d, 0.2)
    low = d.data <= 0.25
    checks.append(_check("cutoff-rho-identity",
                         np.max(np.abs(rho.data[low] - d.data[low])), 1e-14))
    hi = d.data >= 0.75
    meas = np.max(np.abs(rho.data[hi] - 0.5)) if hi.any() else 0.0
    checks.append(_check("cutoff-rho-plateau", meas, 1e-14))

    # ---- projection ----
    U = random_vector(grid, seed + 2)
    PU, _ = P.project(U)
    PPU, _ = P.project(PU)
    scale = max(PU.max_abs(), 1e-30)
    checks.append(_check("projection-idempotence",
                         (PPU - PU).max_abs() / scale, 1e-8))
    checks.append(_check("projection-norm-one",
                         ops.norm(PU, I2, grid)
                         / max(ops.norm(U, I2, grid), 1e-300), 1.0 + 1e-8))
    Wdf = random_divergence_free(grid, seed + 3)
    orth = abs(ops.inner_product(Wdf, U - PU, I2, grid)) \
        / max(ops.norm(Wdf, I2, grid) * ops.norm(U, I2, grid), 1e-300)
    checks.append(_check("projection-orthogonality", orth, 1e-6))
    checks.append(_check("projection-divergence",
                         divergence_defect(PU, b) / scale, 1e-10))
    Ux = VectorField(grid, grid.y1, np.zeros(grid.shape))
    PUx, _ = P.project(Ux)
    target = VectorField(grid, grid.y1 / 2.0, -grid.y2 / 2.0)
    checks.append(_check("projection-closed-form",
                         (PUx - target).max_abs(), 1e-3))

    # ---- elliptic ----
    if grid.n_r >= 16:
        res = solve_dirichlet(ScalarField(grid, np.ones(grid.shape)))
        exact = (grid.r[:, None] ** 2 - 1.0) / 4.0
        checks.append(_check("elliptic-closed-form",
                             np.max(np.abs(res.q.data - exact)),
                             max(1e-4, 8.0 * h * h)))
    else:
        checks.append(_skip("elliptic-closed-form",
                            "below minimum resolution"))
    neg = ScalarField(grid, -np.abs(np.cos(3 * grid.y1) + 0.5 * grid.y2))
    qmp = solve_dirichlet(neg).q.data
    checks.append(CheckResult("elliptic-max-principle", float(qmp.min()),
                              0.0, bool(qmp.min() >= -1e-12)))

    # ---- normal operator ----
    e1 = VectorField(grid, np.ones(grid.shape), np.zeros(grid.shape))
    Ae1 = A_apply(e1)
    interior = np.broadcast_to((grid.d >= 2 * h)[:, None], grid.shape)
    err = np.maximum(np.abs(Ae1.c1 - omega ** 2), np.abs(Ae1.c2))
    checks.append(_check("A-eigencheck", np.max(err[interior]), 1e-3))
    checks.append(_check("A-kernel", A_apply(S0.field).max_abs(), 1e-3))
    Ua = random_divergence_free(grid, seed + 4)
    Wa = random_divergence_free(grid, seed + 5)
    AU, AW = A_apply(Ua), A_apply(Wa)
    nprod = ops.norm(Ua, I2, grid) * ops.norm(Wa, I2, grid)
    sym = abs(ops.inner_product(Ua, AW, I2, grid)
              - ops.inner_product(AU, Wa, I2, grid)) / nprod
    # symmetry holds at discretization order on this collocated grid;
    # the constant below is calibrated from the measured h^2 trend
    checks.append(_check("A-symmetry", sym, max(1e-6, 2.0 * h * h)))
    pos = ops.inner_product(Wa, AW, I2, grid) / ops.norm(Wa, I2, grid) ** 2
    checks.append(CheckResult("A-positivity", pos, -1e-6, pos >= -1e-6))
    bf = boundary_quadratic_form(Ua, Wa, b.p, b, grid)
    checks.append(_check("A-boundary-form-agreement",
                         abs(ops.inner_product(Ua, AW, I2, grid) - bf)
                         / nprod, max(1e-3, 20.0 * h * h)))
    checks.append(_check("A-eigen-pairing",
                         abs(ops.inner_product(e1, Ae1, I2, grid)
                             - np.pi * omega ** 2), 2e-3))

    # ---- regularized operator ----
    reg = RegularizationParams(0.2)
    AeU = apply_Af_eps(b.p, Ua, reg, b, grid, check=False)[0]
    AeW = apply_Af_eps(b.p, Wa, reg, b, grid, check=False)[0]
    sym_eps = abs(ops.inner_product(Ua, AeW, I2, grid)
                  - ops.inner_product(AeU, Wa, I2, grid)) / nprod
    checks.append(_check("A-eps-symmetry", sym_eps, 1e-8))
    pos_eps = eps_quadratic_form(b.p, Wa, Wa, reg, grid)
    checks.append(CheckResult("A-eps-positivity", pos_eps, 0.0,
                              pos_eps >= -1e-12))
    from .normal_ops import _eps_one_form
    u_pre = _eps_one_form(b.p, Wa, reg, grid)
    cu = grid.ops.curl(u_pre)
    outside = np.broadcast_to((grid.d >= reg.eps)[:, None], grid.shape)
    checks.append(_check("A-eps-curl-outside-collar",
                         np.max(np.abs(cu.b12[outside])), 1e-10))
    if grid.n_r >= 160:
        vals = [eps_quadratic_form(b.p, e1, e1,
                                   RegularizationParams(e), grid)
                for e in (0.2, 0.1, 0.05)]
        order = np.log2((vals[0] - vals[1]) / (vals[1] - vals[2]))
        checks.append(CheckResult("A-eps-convergence", order, 0.9,
                                  order >= 0.9))
    else:
        checks.append(_skip("A-eps-convergence",
                            "below minimum resolution"))

    # ---- multiplication operators ----
    Ce1 = apply_mult(b.omega, e1, b, grid)
    e2 = VectorField(grid, np.zeros(grid.shape), np.ones(grid.shape))
    checks.append(_check("mult-vorticity",
                         (Ce1 + 2.0 * omega * e2).max_abs(), 1e-10))
    MW = apply_mult(b.omega, Wa, b, grid)
    checks.append(_check("mult-norm-bound",
                         ops.norm(MW, I2, grid)
                         / max(2 * abs(omega) * ops.norm(Wa, I2, grid),
                               1e-300), 1.0 + 1e-8))
    anti = abs(ops.inner_product(Wa, MW, I2, grid)) \
        / ops.norm(Wa, I2, grid) ** 2
    checks.append(_check("C-antisymmetry", anti, 1e-8))

    # ---- commutators ----
    # products of degree-4 test fields need n_theta >= 32 to stay below
    # the Nyquist mode, otherwise aliasing breaks the spectral identities
    from .normal_ops import commutator_residual
    if grid.n_theta >= 32:
        Wc = random_divergence_free(grid, seed + 6)
        r1 = commutator_residual(S0, b.p, Wc, b, grid)
        checks.append(_check("commutator-rotation", r1,
                             max(1e-8, 5 * h * h)))
        fnt = ScalarField(grid, (1 - grid.r[:, None] ** 2)
                          * (1 + grid.y1 / 2) / 2)
        r2 = commutator_residual(S0, fnt, Wc, b, grid)
        checks.append(_check("commutator-nontrivial-f", r2,
                             max(1e-8, 5 * h * h)))
    else:
        checks.append(_skip("commutator-rotation",
                            "below minimum resolution"))
        checks.append(_skip("commutator-nontrivial-f",
                            "below minimum resolution"))
    if grid.n_r >= 32 and grid.n_theta >= 32:
        Wc = random_divergence_free(grid, seed + 6)
        r3 = commutator_residual(fam.s1[2], b.p, Wc, b, grid, use_eps=0.2)
        checks.append(_check("commutator-eps-interior", r3, 100.0 * h * h))
    else:
        checks.append(_skip("commutator-eps-interior",
                            "below minimum resolution"))

    # ---- Lie identities ----
    LSe1 = lie_derive(S0, e1)
    checks.append(_check("lie-rotation-e1", (LSe1 + e2).max_abs(), 1e-10))
    checks.append(_check("lie-self", lie_derive(S0, S0.field).max_abs(),
                         1e-10))
    if grid.n_theta >= 16:
        prof = np.cos(2 * np.pi * grid.r)[:, None]
        wtest = OneForm(
            grid, prof * np.cos(3 * grid.theta)[None, :],
            prof * grid.r[:, None] * np.sin(2 * grid.theta)[None, :])
        lhs = grid.ops.curl(lie_derive(S0, wtest))
        rhs = lie_derive(S0, grid.ops.curl(wtest))
        checks.append(_check("lie-curl-commute",
                             np.max(np.abs(lhs.b12 - rhs.b12)), 1e-8))
    else:
        checks.append(_skip("lie-curl-commute", "below minimum resolution"))

    # ---- data lift ----
    z = VectorField(grid, np.zeros(grid.shape), np.zeros(grid.shape))
    jets = jet_recursion(e1, z, [], 0, b, grid)
    checks.append(_check("lift-w2", (jets[2] + omega ** 2 * e1).max_abs(),
                         1e-3))
    series = assemble_series(jets, 0, prov, grid)
    checks.append(_check("lift-forcing-vanishes",
                         ops.norm(series.forcing(0.0), I2, grid), 1e-10))

    # ---- short evolution: energy bound and curl conservation ----
    if grid.n_r >= 24:
        cfg = EvolveConfig(dt=2e-3, t_final=0.2, scheme="midpoint",
                           lift=False)
        ev = Evolver(cfg, prov, grid)
        traj = ev.run(e1, z)
        Es = [energy_base(s, b, grid) for s in traj.states]
        bound_ok = all(E <= np.exp(s.t) * Es[0] * (1 + 1e-2)
                       for E, s in zip(Es, traj.states))
        checks.append(CheckResult("energy-bound",
                                  float(max(E / (np.exp(s.t) * Es[0])
                                            for E, s in
                                            zip(Es, traj.states))),
                                  1.0 + 1e-2, bound_ok))
        base = curl_invariant(traj.states[0], b, grid)
        drift = max(ops.two_form_norm(curl_invariant(s, b, grid) - base,
                                      grid) for s in traj.states)
        checks.append(_check("curl-conservation-drift", drift,
                             max(1e-6, 50.0 * (cfg.dt ** 2 + h * h))))
        checks.append(_check("divergence-preservation",
                             max(max(s.defect_W, s.defect_Wdot)
                                 for s in traj.states), 1e-8))
    else:
        checks.append(_skip("energy-bound", "below minimum resolution"))
        checks.append(_skip("curl-conservation-drift",
                            "below minimum resolution"))

    return checks
