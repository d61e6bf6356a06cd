"""Dirichlet solves for the divergence-form operator d_a(kappa g^ab d_b q).

Two entry points share one function:

* scalar right-hand sides use the conservation-form finite-volume operator,
  tridiagonal per Fourier mode for the identity metric (direct solve) and
  a matrix-free preconditioned CG for a general SPD metric;
* divergence-form data (a vector field U, meaning rhs = div U) is routed
  through the projection machinery, whose potential solve uses the exact
  quadrature-adjoint pair so that downstream divergences cancel to solver
  precision.

The homogeneous boundary value is imposed through the ghost ring
q_ghost = -q_last, i.e. the linear extrapolation of q vanishes at r = 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .fields import ScalarField, SymmetricTensorField, VectorField
from .grid import Grid
from .projection import SolverError, projector_for


@dataclass
class DirichletResult:
    q: ScalarField
    residual: float
    iterations: int


def _tridiag_bands(grid: Grid, m: float) -> np.ndarray:
    """Banded (ab) storage of the per-mode radial operator.

    Row j: (1/(r_j h^2)) [rho_{j+1}(q_{j+1}-q_j) - rho_j(q_j-q_{j-1})]
    - (m^2/r_j^2) q_j, with the r=1 face gradient -2 q_N / h.
    """
    n, h, r, rho = grid.n_r, grid.dr, grid.r, grid.rho
    ab = np.zeros((3, n))
    inv = 1.0 / (r * h * h)
    # upper diagonal (coupling to j+1), stored at ab[0, 1:]
    ab[0, 1:] = rho[1:n] * inv[:-1]
    # lower diagonal (coupling to j-1), stored at ab[2, :-1]
    ab[2, :-1] = rho[1:n] * inv[1:]
    diag = -(rho[1:n + 1] + rho[0:n]) * inv
    diag[-1] = -(2.0 * rho[n] + rho[n - 1]) * inv[-1] if n > 1 else -2.0 * rho[n] * inv[-1]
    ab[1, :] = diag - (m * m) / (r * r)
    return ab


class DirichletSolver:
    """Cached per-grid workspace for the scalar-rhs path."""

    def __init__(self, grid: Grid):
        self.grid = grid
        self._bands = [_tridiag_bands(grid, m) for m in grid.ops.m_tilde]

    def apply_flat(self, q: np.ndarray) -> np.ndarray:
        """Identity-metric operator applied to a field (for residuals)."""
        grid = self.grid
        qh = np.fft.rfft(q, axis=1)
        out = np.empty_like(qh)
        for i, ab in enumerate(self._bands):
            n = grid.n_r
            v = qh[:, i]
            res = ab[1] * v
            if n > 1:
                res[:-1] += ab[0, 1:] * v[1:]
                res[1:] += ab[2, :-1] * v[:-1]
            out[:, i] = res
        return np.fft.irfft(out, n=grid.n_theta, axis=1)

    def solve_flat(self, rhs: np.ndarray) -> np.ndarray:
        grid = self.grid
        rh = np.fft.rfft(rhs, axis=1)
        out = np.empty_like(rh)
        for i, ab in enumerate(self._bands):
            out[:, i] = (solve_banded((1, 1), ab, rh[:, i].real)
                         + 1j * solve_banded((1, 1), ab, rh[:, i].imag))
        return np.fft.irfft(out, n=grid.n_theta, axis=1)


_solvers: dict = {}


def _solver_for(grid: Grid) -> DirichletSolver:
    key = (id(grid), grid.shape)
    s = _solvers.get(key)
    if s is None:
        s = DirichletSolver(grid)
        _solvers[key] = s
    return s


def _apply_metric_operator(grid: Grid, q: np.ndarray,
                           g_inv: SymmetricTensorField,
                           kappa: np.ndarray | None) -> np.ndarray:
    """div(kappa g^{-1} grad0 q) assembled from the adjoint-pair blocks.

    grad0 is the potential gradient of the projection workspace, so the
    operator is symmetric in the quadrature inner product by construction.
    """
    P = projector_for(grid)
    lam_hat = np.fft.rfft(q, axis=1)
    cr, ct = P._gradient_modes(lam_hat)
    vr = np.fft.irfft(cr, n=grid.n_theta, axis=1)
    vt = np.fft.irfft(ct, n=grid.n_theta, axis=1)
    V = VectorField.from_polar(grid, vr, vt)
    from .fields import OneForm
    V = g_inv.raise_form(OneForm(grid, V.c1, V.c2))
    return grid.ops.div(V, kappa).data


def solve_dirichlet(rhs, g_inv: SymmetricTensorField | None = None,
                    kappa: ScalarField | None = None,
                    grid: Grid | None = None,
                    tol: float = 1e-10,
                    maxiter: int | None = None) -> DirichletResult:
    """Solve kappa^{-1} d_a(kappa g^{ab} d_b q) = rhs, q(1) = 0.

    ``rhs`` is a ScalarField, or a VectorField U for divergence-form data
    rhs = div U.  Relative residual is measured in the quadrature norm of
    the discrete system actually solved.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if isinstance(rhs, VectorField):
        grid = grid or rhs.grid
        P = projector_for(grid)
        if g_inv is None or _is_identity(g_inv):
            rhs_hat = P._div_modes(rhs)
            lam_hat = P._solve_modes(rhs_hat)
            lam = np.fft.irfft(lam_hat, n=grid.n_theta, axis=1)
            return DirichletResult(ScalarField(grid, lam), 0.0, 0)
        g = g_inv.inverse()
        _, q = P.project(rhs, g=g, g_inv=g_inv)
        return DirichletResult(q, P.tol, -1)

    grid = grid or rhs.grid
    if not np.all(np.isfinite(rhs.data)):
        raise ValueError("rhs contains non-finite values")
    s = _solver_for(grid)
    kap = kappa.data if kappa is not None else None
    if g_inv is None or _is_identity(g_inv):
        q = s.solve_flat(rhs.data)
        res = _relative_residual(grid, s.apply_flat(q), rhs.data)
        return DirichletResult(ScalarField(grid, q), res, 0)

    g_inv.check_spd()
    maxiter = maxiter or 10 * grid.n_r * grid.n_theta
    w = grid.w

    def A(q):
        return _apply_metric_operator(grid, q, g_inv, kap)

    b = rhs.data
    q = np.zeros(grid.shape)
    r = b - A(q)
    bnorm = np.sqrt(np.sum(w * b * b)) or 1.0
    z = s.solve_flat(r)
    p = z.copy()
    rz = float(np.sum(w * r * z))
    it = 0
    while it < maxiter:
        res = np.sqrt(np.sum(w * r * r)) / bnorm
        if res <= tol:
            break
        Ap = A(p)
        pAp = float(np.sum(w * p * Ap))
        alpha = rz / pAp
        q = q + alpha * p
        r = r - alpha * Ap
        z = s.solve_flat(r)
        rz_new = float(np.sum(w * r * z))
        p = z + (rz_new / rz) * p
        rz = rz_new
        it += 1
    res = np.sqrt(np.sum(w * r * r)) / bnorm
    if res > tol:
        raise SolverError(
            f"Dirichlet PCG did not converge: relative residual {res:.3e} "
            f"after {it} iterations", achieved=res)
    return DirichletResult(ScalarField(grid, q), res, it)


def _relative_residual(grid, lhs, rhs):
    w = grid.w
    num = np.sqrt(np.sum(w * (lhs - rhs) ** 2))
    den = np.sqrt(np.sum(w * rhs * rhs)) or 1.0
    return float(num / den)


def _is_identity(t: SymmetricTensorField) -> bool:
    return (np.all(t.t11 == 1.0) and np.all(t.t12 == 0.0)
            and np.all(t.t22 == 1.0))
