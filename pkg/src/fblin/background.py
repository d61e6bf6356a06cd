"""Background Euler states: the smooth solution (x, p) being linearized
around, with the metric, vorticity and pressure jets the operators need.

The built-in provider is the rigidly rotating disk with angular velocity
Omega.  Its Lagrangian metric is the identity, the volume factor is one,
the vorticity two-form is the constant 2*Omega, and the shipped pressure
profile is p = Omega^2 (1 - |y|^2)/2, which vanishes on the boundary and
satisfies the sign condition grad_N p = -Omega^2 < 0.  Note this profile is
the stable testbed pressure for the operator suite; the validator reports
the actual Euler-equation residual of whatever pair (x, p) it is given
rather than assuming consistency.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .fields import ScalarField, SymmetricTensorField, TwoForm, VectorField
from .grid import Grid


@dataclass
class BackgroundJet:
    """All background data at one time t.

    Jet accessors return D_t^s of p, g, omega for 0 <= s <= j_max.
    """

    grid: Grid
    t: float
    jacobian: tuple  # (J11, J12, J21, J22) arrays, dx^i/dy^a
    g: SymmetricTensorField
    g_inv: SymmetricTensorField
    kappa: ScalarField
    g_dot: SymmetricTensorField
    omega: TwoForm
    p: ScalarField
    p_dot: ScalarField
    j_max: int = 4
    higher_jets: dict = field(default_factory=dict)  # (name, s) -> field
    x: VectorField | None = None          # x(t, y)
    v: VectorField | None = None          # D_t x
    a: VectorField | None = None          # D_t^2 x

    def p_jet(self, s: int) -> ScalarField:
        if s == 0:
            return self.p
        if s == 1:
            return self.p_dot
        self._check_order(s)
        return self.higher_jets.get(("p", s), ScalarField(self.grid, 0.0))

    def g_jet(self, s: int) -> SymmetricTensorField:
        if s == 0:
            return self.g
        if s == 1:
            return self.g_dot
        self._check_order(s)
        return self.higher_jets.get(("g", s),
                                    SymmetricTensorField.zero(self.grid))

    def omega_jet(self, s: int) -> TwoForm:
        if s == 0:
            return self.omega
        self._check_order(s)
        return self.higher_jets.get(("omega", s), TwoForm(self.grid, 0.0))

    def _check_order(self, s: int) -> None:
        if s > self.j_max:
            raise ValueError(f"jet order {s} exceeds j_max={self.j_max}")


class RigidRotationBackground:
    """Provider: time -> BackgroundJet for the rotating-disk background."""

    def __init__(self, omega: float, grid: Grid, j_max: int = 4):
        self.omega_speed = float(omega)
        self.grid = grid
        self.j_max = j_max
        self.static_operators = True  # g, p, omega independent of t

    @property
    def c0(self) -> float:
        return self.omega_speed ** 2

    def at(self, t: float) -> BackgroundJet:
        grid = self.grid
        Om = self.omega_speed
        c, s = np.cos(Om * t), np.sin(Om * t)
        one = np.ones(grid.shape)
        zero = np.zeros(grid.shape)
        p = ScalarField(grid, 0.5 * Om ** 2 * (1.0 - grid.r[:, None] ** 2))
        x = VectorField(grid, c * grid.y1 - s * grid.y2,
                        s * grid.y1 + c * grid.y2)
        v = VectorField(grid, -Om * x.c2, Om * x.c1)
        a = VectorField(grid, -Om ** 2 * x.c1, -Om ** 2 * x.c2)
        return BackgroundJet(
            grid=grid, t=t,
            jacobian=(c * one, -s * one, s * one, c * one),
            g=SymmetricTensorField.identity(grid),
            g_inv=SymmetricTensorField.identity(grid),
            kappa=ScalarField(grid, one),
            g_dot=SymmetricTensorField.zero(grid),
            omega=TwoForm(grid, 2.0 * Om * one),
            p=p,
            p_dot=ScalarField(grid, zero),
            j_max=self.j_max,
            x=x, v=v, a=a)


def rigid_rotation_background(omega: float, grid: Grid,
                              j_max: int = 4) -> RigidRotationBackground:
    return RigidRotationBackground(omega, grid, j_max)


@dataclass
class ValidationReport:
    euler_residual: float
    volume_residual: float
    poisson_residual: float
    boundary_p: float
    c0: float
    sign_condition_ok: bool
    failures: list

    @property
    def ok(self) -> bool:
        return not self.failures


def validate_background(b: BackgroundJet, grid: Grid,
                        tol: float = 1e-8) -> ValidationReport:
    """Report residuals of the Euler system for the supplied jet.

    Checks: D_t^2 x + grad p (Eulerian gradient, pulled back through the
    jacobian), |kappa - 1|, the pressure Poisson identity
    -Lap p = (d_j V^k)(d_k V^j), the boundary trace of p, and the sign of
    grad_N p.  A nonpositive c0 is flagged as a distinguished failure.
    """
    o = grid.ops
    failures = []

    kap_res = float(np.max(np.abs(b.kappa.data - 1.0)))
    if kap_res > tol:
        failures.append(("volume-constraint", kap_res))

    # Eulerian gradient of p: dp/dx^i = (dy^a/dx^i) dp/dy^a
    dp = o.grad(b.p)
    J11, J12, J21, J22 = b.jacobian
    det = J11 * J22 - J12 * J21
    # inverse jacobian rows: dy/dx = adj(J)/det
    dpx1 = (J22 * dp.c1 - J21 * dp.c2) / det
    dpx2 = (-J12 * dp.c1 + J11 * dp.c2) / det
    euler_res = 0.0
    if b.a is not None:
        euler_res = float(max(np.max(np.abs(b.a.c1 + dpx1)),
                              np.max(np.abs(b.a.c2 + dpx2))))

    # Poisson residual: -Lap p - (d_j V^k)(d_k V^j) in the Eulerian frame.
    # For the backgrounds handled here the metric is flat, so the
    # Laplacian is the divergence of the gradient of p in y coordinates.
    lap = o.div(VectorField(grid, dp.c1, dp.c2))
    poisson_res = 0.0
    if b.v is not None:
        # d_k V^i = (d V^i/d y^a)(d y^a/d x^k)
        v1r, v1t = o.d_r(b.v.c1), o.d_theta(b.v.c1) / grid.r[:, None]
        v2r, v2t = o.d_r(b.v.c2), o.d_theta(b.v.c2) / grid.r[:, None]
        dv = {}
        for name, fr, ft in (("1", v1r, v1t), ("2", v2r, v2t)):
            dy1 = grid.cos[None, :] * fr - grid.sin[None, :] * ft
            dy2 = grid.sin[None, :] * fr + grid.cos[None, :] * ft
            # chain to x derivatives through the inverse jacobian
            dv[name] = ((J22 * dy1 - J21 * dy2) / det,
                        (-J12 * dy1 + J11 * dy2) / det)
        quad = (dv["1"][0] * dv["1"][0] + dv["2"][0] * dv["1"][1]
                + dv["1"][1] * dv["2"][0] + dv["2"][1] * dv["2"][1])
        poisson_res = float(np.max(np.abs(-lap.data - quad)))

    boundary_p = float(np.max(np.abs(o.boundary_trace(b.p.data))))
    if boundary_p > tol:
        failures.append(("boundary-pressure", boundary_p))

    # grad_N p on the boundary: radial derivative extrapolated to r = 1
    dpn = o.boundary_trace(o.d_r(b.p.data))
    c0 = float(-np.max(dpn))
    sign_ok = c0 > 0.0
    if not sign_ok:
        failures.append(("sign-condition", c0))

    if not b.g.is_spd():
        failures.append(("metric-not-spd", 0.0))

    return ValidationReport(
        euler_residual=euler_res,
        volume_residual=kap_res,
        poisson_residual=poisson_res,
        boundary_p=boundary_p,
        c0=c0,
        sign_condition_ok=sign_ok,
        failures=failures)


class TabulatedBackground:
    """Background interpolated in time from per-sample CSV node data.

    Each sample row: j,k,J11,J12,J21,J22,p.  Jets in t are produced by
    cubic interpolation of the samples (documented choice); metric data
    derive from the jacobian.  Ingest validates kappa = 1 and the boundary
    trace of p.
    """

    def __init__(self, times, tables, grid: Grid, j_max: int = 2):
        if len(times) != len(tables):
            raise ValueError("times and tables length mismatch")
        if len(times) < 4:
            raise ValueError("need at least 4 time samples for cubic jets")
        self.times = np.asarray(times, dtype=float)
        self.tables = tables
        self.grid = grid
        self.j_max = j_max
        self.static_operators = False
        for t, tab in zip(times, tables):
            kap = (tab["J11"] * tab["J22"] - tab["J12"] * tab["J21"])
            if np.max(np.abs(kap - 1.0)) > 1e-8:
                raise ValueError(f"sample at t={t} violates kappa=1")
            bp = grid.ops.boundary_trace(tab["p"])
            if np.max(np.abs(bp)) > 1e-6:
                raise ValueError(f"sample at t={t} has nonzero boundary p")

    @classmethod
    def from_csv(cls, paths, times, grid: Grid, **kw):
        tables = []
        for path in paths:
            cols = {k: np.zeros(grid.shape)
                    for k in ("J11", "J12", "J21", "J22", "p")}
            with open(path, newline="") as f:
                for row in csv.DictReader(f):
                    j, k = int(row["j"]), int(row["k"])
                    for name in cols:
                        cols[name][j, k] = float(row[name])
            tables.append(cols)
        return cls(times, tables, grid, **kw)

    def _interp(self, name, t, order=0):
        # cubic Lagrange interpolation on the 4 nearest samples
        i = int(np.clip(np.searchsorted(self.times, t) - 2, 0,
                        len(self.times) - 4))
        ts = self.times[i:i + 4]
        vals = [self.tables[i + s][name] for s in range(4)]
        out = np.zeros(self.grid.shape)
        for s in range(4):
            w = _lagrange_weight(ts, s, t, order)
            out += w * vals[s]
        return out

    def at(self, t: float) -> BackgroundJet:
        grid = self.grid
        J = tuple(self._interp(n, t) for n in ("J11", "J12", "J21", "J22"))
        J11, J12, J21, J22 = J
        g = SymmetricTensorField(
            grid,
            J11 * J11 + J21 * J21,
            J11 * J12 + J21 * J22,
            J12 * J12 + J22 * J22)
        dJ = tuple(self._interp(n, t, 1) for n in ("J11", "J12", "J21", "J22"))
        dJ11, dJ12, dJ21, dJ22 = dJ
        g_dot = SymmetricTensorField(
            grid,
            2 * (J11 * dJ11 + J21 * dJ21),
            dJ11 * J12 + J11 * dJ12 + dJ21 * J22 + J21 * dJ22,
            2 * (J12 * dJ12 + J22 * dJ22))
        kappa = ScalarField(grid, J11 * J22 - J12 * J21)
        p = ScalarField(grid, self._interp("p", t))
        p_dot = ScalarField(grid, self._interp("p", t, 1))
        # vorticity from the velocity one-form pulled back: for tabulated
        # data we form omega = curl of (g . V) with V = J^{-1} dJ/dt y ...
        # kept first order: omega = d(v-form) with v^a from dx/dt
        v1 = dJ11 * grid.y1 + dJ12 * grid.y2
        v2 = dJ21 * grid.y1 + dJ22 * grid.y2
        # Lagrangian components, lowered with g
        det = kappa.data
        va = (J22 * v1 - J21 * v2) / det
        vb = (-J12 * v1 + J11 * v2) / det
        from .fields import OneForm, lower
        vform = lower(VectorField(grid, va, vb), g)
        om = grid.ops.curl(OneForm(grid, vform.c1, vform.c2))
        return BackgroundJet(
            grid=grid, t=t, jacobian=J, g=g, g_inv=g.inverse(),
            kappa=kappa, g_dot=g_dot, omega=om, p=p, p_dot=p_dot,
            j_max=self.j_max)


def _lagrange_weight(ts, s, t, order):
    others = [x for i, x in enumerate(ts) if i != s]
    denom = np.prod([ts[s] - x for x in others])
    if order == 0:
        return np.prod([t - x for x in others]) / denom
    total = 0.0
    for skip in range(3):
        total += np.prod([t - x for i, x in enumerate(others) if i != skip])
    return total / denom
