"""Discrete differential operators on the polar disk grid.

Differentiation is Fourier-spectral in theta and second-order finite
difference in r.  Operators are written in polar physical components and
converted to Cartesian at the nodes, which makes two structural identities
hold to round-off:

* curl(grad q) = 0, because the radial and angular difference operators
  act on different array axes and therefore commute exactly;
* the divergence is in conservation (flux) form, so its exact negative
  adjoint in the quadrature inner product is available in closed form and
  serves as the potential gradient of the Leray projection.

The free radial derivative (for gradients of general scalars) uses central
differences with one-sided second-order stencils at the innermost and
outermost rings.
"""

from __future__ import annotations

import numpy as np

from .grid import Grid, GridError
from .fields import (OneForm, ScalarField, SymmetricTensorField, TwoForm,
                     VectorField)


def _free_radial_matrix(n: int, h: float) -> np.ndarray:
    """Central differences, one-sided 2nd order at both ends (exact on
    quadratics)."""
    D = np.zeros((n, n))
    if n == 1:
        return D
    if n == 2:
        D[0, :] = (-1.0, 1.0)
        D[1, :] = (-1.0, 1.0)
        return D / h
    for j in range(1, n - 1):
        D[j, j - 1] = -0.5
        D[j, j + 1] = 0.5
    D[0, 0:3] = (-1.5, 2.0, -0.5)
    D[-1, -3:] = (0.5, -2.0, 1.5)
    return D / h


def boundary_weights(n: int) -> np.ndarray:
    """Extrapolation weights from the last rings to the circle r = 1.

    Quadratic (3-node) for n >= 3, degrading gracefully on tiny grids.
    """
    if n >= 3:
        w = np.zeros(n)
        w[-3:] = (3.0 / 8.0, -10.0 / 8.0, 15.0 / 8.0)
        return w
    if n == 2:
        return np.array([-0.5, 1.5])
    return np.array([1.0])


def origin_weights(n: int) -> np.ndarray:
    """Extrapolation weights from the first rings to r = 0."""
    if n >= 3:
        w = np.zeros(n)
        w[:3] = (15.0 / 8.0, -10.0 / 8.0, 3.0 / 8.0)
        return w
    if n == 2:
        return np.array([1.5, -0.5])
    return np.array([1.0])


class DiskOperators:
    """Per-grid workspace: FD matrices, FFT multipliers, quadrature."""

    def __init__(self, grid: Grid):
        self.grid = grid
        n, h = grid.n_r, grid.dr
        self.Dr = _free_radial_matrix(n, h)
        # spectral multiplier i*m with the Nyquist derivative zeroed
        m = np.fft.rfftfreq(grid.n_theta, d=1.0 / grid.n_theta)
        m_t = m.copy()
        if grid.n_theta % 2 == 0:
            m_t[-1] = 0.0
        self.m_tilde = m_t
        self.bw = boundary_weights(n)
        self.ow = origin_weights(n)
        self._grad0 = None
        self._div_rad = None

    # ---------------- basic derivatives ----------------

    def d_theta(self, f: np.ndarray) -> np.ndarray:
        F = np.fft.rfft(f, axis=1)
        F *= 1j * self.m_tilde[None, :]
        return np.fft.irfft(F, n=self.grid.n_theta, axis=1)

    def d_r(self, f: np.ndarray) -> np.ndarray:
        return self.Dr @ f

    def boundary_trace(self, f: np.ndarray) -> np.ndarray:
        """Extrapolated values on r = 1, shape (n_theta,)."""
        return self.bw @ f

    def origin_trace(self, f: np.ndarray) -> np.ndarray:
        return self.ow @ f

    # ---------------- quadrature ----------------

    def integral(self, f: np.ndarray) -> float:
        return float(np.sum(self.grid.w * f))

    def scalar_norm(self, f: np.ndarray) -> float:
        return float(np.sqrt(np.sum(self.grid.w * f * f)))

    # ---------------- grad / div / curl ----------------

    def grad(self, q: ScalarField) -> OneForm:
        """Cartesian covariant components of dq."""
        g = self.grid
        wr = self.d_r(q.data)
        wt = self.d_theta(q.data) / g.r[:, None]
        return OneForm.from_polar(g, wr, wt)

    def div(self, V: VectorField, kappa: np.ndarray | None = None) -> ScalarField:
        """kappa^{-1} d_a (kappa V^a) in flux form.

        The radial flux lives on cell faces: interior faces average the two
        adjacent rings, the outer face extrapolates quadratically to r = 1
        and the origin face carries zero flux (rho = 0 there).
        """
        g = self.grid
        vr = V.r_hat()
        vt = V.theta_hat()
        if kappa is not None:
            vr = kappa * vr
            vt = kappa * vt
        rad = self._div_radial(vr)
        ang = self.d_theta(vt) / g.r[:, None]
        out = rad + ang
        if kappa is not None:
            out = out / kappa
        return ScalarField(g, out)

    def _div_radial(self, vr: np.ndarray) -> np.ndarray:
        """(1/r) d(rho * face_flux)/dr with face averaging."""
        g = self.grid
        n, h = g.n_r, g.dr
        flux = np.empty((n + 1,) + vr.shape[1:])
        flux[0] = 0.0
        if n >= 2:
            flux[1:n] = 0.5 * (vr[:-1] + vr[1:]) * g.rho[1:n, None]
        flux[n] = (self.bw @ vr) * g.rho[n]
        return (flux[1:] - flux[:-1]) / (g.r[:, None] * h)

    def curl(self, w: OneForm) -> TwoForm:
        """beta_12 = d_1 w_2 - d_2 w_1 via the polar exterior derivative."""
        g = self.grid
        wr = w.r_hat()
        wt = w.theta_hat()
        b = (self.d_r(g.r[:, None] * wt) - self.d_theta(wr)) / g.r[:, None]
        return TwoForm(g, b)

    def jacobian(self, W: VectorField):
        """Cartesian partials (d_x, d_y) of both components; 4 arrays."""
        g = self.grid
        out = []
        for comp in (W.c1, W.c2):
            fr = self.d_r(comp)
            ft = self.d_theta(comp) / g.r[:, None]
            dx = g.cos[None, :] * fr - g.sin[None, :] * ft
            dy = g.sin[None, :] * fr + g.cos[None, :] * ft
            out.append((dx, dy))
        return out[0][0], out[0][1], out[1][0], out[1][1]

    # ---------------- potential gradient (adjoint pair) ----------------

    @property
    def grad0_radial(self) -> np.ndarray:
        """Radial matrix G0 with div-adjointness: (q, div V)_w = -(G0 q, V)_w.

        Encodes the homogeneous Dirichlet condition at r = 1 through the
        boundary flux of the divergence; used only for projection potentials.
        """
        if self._grad0 is None:
            self._grad0 = self._build_grad0()
        return self._grad0

    def _build_grad0(self) -> np.ndarray:
        g = self.grid
        n, h = g.n_r, g.dr
        rho, r = g.rho, g.r
        G = np.zeros((n, n))
        # interior faces: +/- rho_i/2 onto the two rings they separate
        for i in range(1, n):
            # face i contributes 0.5*rho_i*(q_i - q_{i-1}) to rings i-1, i
            G[i - 1, i] += 0.5 * rho[i]
            G[i - 1, i - 1] -= 0.5 * rho[i]
            G[i, i] += 0.5 * rho[i]
            G[i, i - 1] -= 0.5 * rho[i]
        # outer face: adjoint of the extrapolated boundary flux
        G[:, n - 1] -= self.bw * rho[n]
        return G / (r[:, None] * h)

    @property
    def div_radial_matrix(self) -> np.ndarray:
        """Dense matrix of the radial flux divergence (for per-mode solves)."""
        if self._div_rad is None:
            n = self.grid.n_r
            self._div_rad = self._div_radial(np.eye(n))
        return self._div_rad


# ---------------- module-level field API ----------------


def grad(q: ScalarField) -> OneForm:
    return q.grid.ops.grad(q)


def div(V: VectorField, kappa: ScalarField | None = None) -> ScalarField:
    k = kappa.data if kappa is not None else None
    return V.grid.ops.div(V, k)


def curl(w: OneForm) -> TwoForm:
    return w.grid.ops.curl(w)


def inner_product(X: VectorField, Z: VectorField,
                  g: SymmetricTensorField, grid: Grid) -> float:
    """Quadrature of g_ab X^a Z^b; symmetric and bilinear."""
    grid.check_same(X.grid)
    grid.check_same(Z.grid)
    dens = (g.t11 * X.c1 * Z.c1 + g.t12 * (X.c1 * Z.c2 + X.c2 * Z.c1)
            + g.t22 * X.c2 * Z.c2)
    return float(np.sum(grid.w * dens))


def norm(X: VectorField, g: SymmetricTensorField, grid: Grid) -> float:
    return float(np.sqrt(max(inner_product(X, X, g, grid), 0.0)))


def form_inner_product(a: OneForm, b: OneForm, g_inv: SymmetricTensorField,
                       grid: Grid) -> float:
    """Quadrature of g^ab a_a b_b for one-forms."""
    dens = (g_inv.t11 * a.c1 * b.c1 + g_inv.t12 * (a.c1 * b.c2 + a.c2 * b.c1)
            + g_inv.t22 * a.c2 * b.c2)
    return float(np.sum(grid.w * dens))


def form_norm(a: OneForm, g_inv: SymmetricTensorField, grid: Grid) -> float:
    return float(np.sqrt(max(form_inner_product(a, a, g_inv, grid), 0.0)))


def two_form_norm(b: TwoForm, grid: Grid) -> float:
    """Quadrature norm of the single component beta_12."""
    return float(np.sqrt(np.sum(grid.w * b.b12 ** 2)))


def scalar_norm(q: ScalarField) -> float:
    return q.grid.ops.scalar_norm(q.data)
