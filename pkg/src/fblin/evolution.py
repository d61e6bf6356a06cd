"""Time evolution of the linearized system and its collar regularization.

The second-order equation is marched as the first-order system for
(W, W_dot) with either the implicit midpoint rule (default; its fixed
point is solved by warm-started iteration) or classical RK4.  States are
re-projected onto the divergence-free space whenever their defect exceeds
ten times the solver tolerance; every re-projection is counted and
reported.  Raw initial data can be traded for vanishing data plus a
lifted forcing before the march, and the polynomial series is added back
to every reported state.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .fields import ScalarField, SymmetricTensorField, VectorField
from .grid import Grid
from .normal_ops import (RegularizationParams, apply_A, apply_Af,
                         apply_Af_eps, apply_mult, estimate_operator_norm)
from .projection import divergence_defect, projector_for


@dataclass
class State:
    t: float
    W: VectorField
    Wdot: VectorField
    defect_W: float = 0.0
    defect_Wdot: float = 0.0

    def certify(self, b) -> "State":
        self.defect_W = divergence_defect(self.W, b)
        self.defect_Wdot = divergence_defect(self.Wdot, b)
        return self


@dataclass
class EvolveConfig:
    dt: float
    t_final: float
    scheme: str = "midpoint"            # "midpoint" | "rk4"
    mode: str = "direct"                # "direct" | "regularized"
    eps: float | None = None
    d0: float = 0.5
    lift: bool = True
    lift_order: int = 0
    reprojection_tol_factor: float = 10.0
    solver_tol: float = 1e-10
    stage_tol: float = 1e-10
    stage_maxiter: int = 50
    diagnostics_every: int = 1
    validate_cfl: bool = True

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.scheme not in ("midpoint", "rk4"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.mode not in ("direct", "regularized"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "regularized":
            if self.eps is None:
                raise ValueError("regularized mode needs eps")
            RegularizationParams(self.eps, d0=self.d0)  # range check


class StageDivergenceError(RuntimeError):
    def __init__(self, step, residual):
        super().__init__(
            f"implicit stage iteration diverged at step {step} "
            f"(residual {residual:.3e})")
        self.step = step


def rhs_acceleration(W: VectorField, Wdot: VectorField, F, b, grid: Grid,
                     reg: RegularizationParams | None = None) -> VectorField:
    """W_ddot = F - A W - Gdot W_dot + C W_dot (A^eps in regularized
    mode)."""
    if reg is None:
        AW = apply_A(W, b, grid)[0] if W.max_abs() else _zero(grid)
    else:
        AW = (apply_Af_eps(b.p, W, reg, b, grid, check=False)[0]
              if W.max_abs() else _zero(grid))
    acc = -AW
    if Wdot.max_abs():
        if b.g_dot.max_abs():
            acc = acc - apply_mult(b.g_dot, Wdot, b, grid)
        if np.any(b.omega.b12):
            acc = acc + apply_mult(b.omega, Wdot, b, grid)
    if F is not None and F.max_abs():
        acc = acc + F
    return acc


def _zero(grid: Grid) -> VectorField:
    z = np.zeros(grid.shape)
    return VectorField(grid, z, z.copy())


@dataclass
class Trajectory:
    states: list = dc_field(default_factory=list)
    rows: list = dc_field(default_factory=list)
    reprojections: int = 0

    @property
    def times(self):
        return [s.t for s in self.states]


class Evolver:
    """One configured march; owns the operator workspace for its grid."""

    def __init__(self, cfg: EvolveConfig, provider, grid: Grid):
        self.cfg = cfg
        self.provider = provider
        self.grid = grid
        self.reg = (RegularizationParams(cfg.eps, d0=cfg.d0)
                    if cfg.mode == "regularized" else None)
        self._b_static = provider.at(0.0) if provider.static_operators else None
        if cfg.scheme == "rk4" and cfg.validate_cfl:
            lam = self.operator_norm()
            limit = 2.0 / np.sqrt(lam) if lam > 0 else np.inf
            if cfg.dt > limit:
                raise ValueError(
                    f"explicit scheme violates dt <= 2/sqrt(|A|): "
                    f"dt={cfg.dt}, limit={limit:.3e}")

    def background(self, t: float):
        return self._b_static if self._b_static is not None \
            else self.provider.at(t)

    def operator_norm(self) -> float:
        b = self.background(0.0)

        def apply_op(Z):
            if self.reg is None:
                return apply_A(Z, b, self.grid)[0]
            return apply_Af_eps(b.p, Z, self.reg, b, self.grid,
                                check=False)[0]

        return estimate_operator_norm(apply_op, self.grid, b)

    def rhs(self, t: float, W: VectorField, Wdot: VectorField,
            F_at_t) -> VectorField:
        b = self.background(t)
        F = F_at_t(t) if callable(F_at_t) else F_at_t
        return rhs_acceleration(W, Wdot, F, b, self.grid, reg=self.reg)

    # ---------------- steppers ----------------

    def _step_midpoint(self, step, t, W, Wdot, forcing):
        cfg = self.cfg
        dt, tm = cfg.dt, t + 0.5 * cfg.dt
        # predictor: explicit Euler
        acc0 = self.rhs(t, W, Wdot, forcing)
        Wn, Wdn = W + dt * Wdot, Wdot + dt * acc0
        scale = max(W.max_abs() + dt * Wdot.max_abs(),
                    Wdot.max_abs() + dt * acc0.max_abs(), 1.0)
        for _ in range(cfg.stage_maxiter):
            Wm = 0.5 * (W + Wn)
            Wdm = 0.5 * (Wdot + Wdn)
            accm = self.rhs(tm, Wm, Wdm, forcing_at(forcing, tm))
            Wn_new = W + dt * Wdm
            Wdn_new = Wdot + dt * accm
            res = max((Wn_new - Wn).max_abs(), (Wdn_new - Wdn).max_abs())
            Wn, Wdn = Wn_new, Wdn_new
            if res <= cfg.stage_tol * scale:
                return Wn, Wdn
        raise StageDivergenceError(step, res / scale)

    def _step_rk4(self, step, t, W, Wdot, forcing):
        dt = self.cfg.dt

        def f(tt, Wx, Wdx):
            return Wdx, self.rhs(tt, Wx, Wdx, forcing_at(forcing, tt))

        k1w, k1v = f(t, W, Wdot)
        k2w, k2v = f(t + dt / 2, W + (dt / 2) * k1w, Wdot + (dt / 2) * k1v)
        k3w, k3v = f(t + dt / 2, W + (dt / 2) * k2w, Wdot + (dt / 2) * k2v)
        k4w, k4v = f(t + dt, W + dt * k3w, Wdot + dt * k3v)
        Wn = W + (dt / 6) * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)
        Wdn = Wdot + (dt / 6) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        return Wn, Wdn

    # ---------------- driver ----------------

    def run(self, W0: VectorField, W1: VectorField, forcing=None,
            sinks=(), observer=None) -> Trajectory:
        """March to t_final.  With cfg.lift, raw data is converted to a
        lifted forcing and the series is added back to reported states."""
        cfg = self.cfg
        grid = self.grid
        series = None
        if cfg.lift and (W0.max_abs() or W1.max_abs()):
            from .datalift import assemble_series, jet_recursion
            b0 = self.background(0.0)
            F0_jets = []
            if forcing is not None:
                F0_jets = [forcing_at(forcing, 0.0)]
            jets = jet_recursion(W0, W1, F0_jets, cfg.lift_order, b0, grid)
            series = assemble_series(jets, cfg.lift_order, self.provider,
                                     grid, F=_as_callable(forcing, grid))
            march_forcing = series.forcing
            W, Wdot = _zero(grid), _zero(grid)
        else:
            march_forcing = forcing
            W, Wdot = W0.copy(), W1.copy()

        n_steps = int(round(cfg.t_final / cfg.dt))
        traj = Trajectory()
        step_fn = (self._step_midpoint if cfg.scheme == "midpoint"
                   else self._step_rk4)
        tol = cfg.reprojection_tol_factor * cfg.solver_tol
        t = 0.0
        for step in range(n_steps + 1):
            reported = self._report_state(t, W, Wdot, series)
            traj.states.append(reported)
            if observer is not None:
                row = observer(self, traj, reported)
                if row is not None:
                    traj.rows.append(row)
                    for sink in sinks:
                        sink(row)
            if step == n_steps:
                break
            W, Wdot = step_fn(step, t, W, Wdot, march_forcing)
            t = (step + 1) * cfg.dt
            # keep the march divergence-free
            dW = divergence_defect(W, self.background(t))
            dV = divergence_defect(Wdot, self.background(t))
            scale = max(W.max_abs(), Wdot.max_abs(), 1.0)
            if max(dW, dV) > tol * scale:
                P = projector_for(grid)
                b = self.background(t)
                if _flat_bg(b):
                    W = P.project(W)[0]
                    Wdot = P.project(Wdot)[0]
                else:
                    W = P.project(W, g=b.g, g_inv=b.g_inv)[0]
                    Wdot = P.project(Wdot, g=b.g, g_inv=b.g_inv)[0]
                traj.reprojections += 1
        return traj

    def _report_state(self, t, W, Wdot, series):
        if series is not None:
            Wr = W + series.series(t)
            Wdr = Wdot + series.series_dot(t)
        else:
            Wr, Wdr = W, Wdot
        st = State(t, Wr, Wdr)
        return st.certify(self.background(t))


def forcing_at(forcing, t):
    if forcing is None:
        return None
    return forcing(t) if callable(forcing) else forcing


def _as_callable(forcing, grid):
    if forcing is None:
        return None
    if callable(forcing):
        return forcing
    return lambda t: forcing


def _flat_bg(b) -> bool:
    g = b.g
    return (np.all(g.t11 == 1.0) and np.all(g.t12 == 0.0)
            and np.all(g.t22 == 1.0))


def run(data, cfg: EvolveConfig, provider, grid: Grid, sinks=(),
        forcing=None, observer=None) -> Trajectory:
    """Spec surface: march (W0, W1) under the configured scheme/mode."""
    W0, W1 = data
    ev = Evolver(cfg, provider, grid)
    return ev.run(W0, W1, forcing=forcing, sinks=sinks, observer=observer)
