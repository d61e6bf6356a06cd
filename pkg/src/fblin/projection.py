"""Orthogonal projection onto discretely divergence-free vector fields.

The complement of the divergence-free space is spanned by g^{-1} G0 q where
G0 is the exact negative quadrature-adjoint of the flux-form divergence
(homogeneous Dirichlet data for the potential is encoded in the boundary
flux).  The projection is therefore a true orthogonal projector in the
metric inner product: idempotence, norm-one and orthogonality to
divergence-free test fields hold to solver precision, and the divergence
of the output vanishes to the same precision.

For the identity metric the normal equations decouple per Fourier mode
into small SPD radial systems solved by cached Cholesky factorizations.
For a general SPD metric the same equations are solved matrix-free by
conjugate gradients preconditioned with the identity-metric solver.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .fields import OneForm, ScalarField, SymmetricTensorField, VectorField
from .grid import Grid
from . import operators as ops


class SolverError(RuntimeError):
    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class LerayProjector:
    """Projection workspace bound to one grid (identity-metric factors
    cached)."""

    def __init__(self, grid: Grid, tol: float = 1e-12, maxiter: int | None = None):
        self.grid = grid
        self.tol = tol
        self.maxiter = maxiter or 10 * grid.n_r * grid.n_theta
        o = grid.ops
        n = grid.n_r
        W = grid.r * grid.dr  # radial weight (the dtheta factor cancels)
        G = o.grad0_radial
        D = o.div_radial_matrix
        # adjoint identity in matrix form: diag(W) D = -G^T diag(W)
        self._G = G
        self._D = D
        self._W = W
        base = G.T @ (W[:, None] * G)
        self._chol = []
        for m in o.m_tilde:
            S = base + np.diag((m * m) * grid.dr / grid.r)
            self._chol.append(cho_factor(S, lower=True))

    # ------------- identity-metric fast path -------------

    def _solve_modes(self, rhs_hat: np.ndarray) -> np.ndarray:
        """Solve S_m lam_m = -W*rhs_m for all rfft modes (columns)."""
        W = self._W
        out = np.empty_like(rhs_hat)
        for m in range(rhs_hat.shape[1]):
            b = -(W * rhs_hat[:, m])
            out[:, m] = cho_solve(self._chol[m], b.real) \
                + 1j * cho_solve(self._chol[m], b.imag)
        return out

    def _gradient_modes(self, lam_hat: np.ndarray):
        grid = self.grid
        m_t = grid.ops.m_tilde
        cr = self._G @ lam_hat
        ct = (1j * m_t[None, :]) * lam_hat / grid.r[:, None]
        return cr, ct

    def potential(self, U: VectorField) -> ScalarField:
        """Potential of the non-solenoidal part (identity metric)."""
        lam_hat = self._solve_modes(self._div_modes(U))
        lam = np.fft.irfft(lam_hat, n=self.grid.n_theta, axis=1)
        return ScalarField(self.grid, lam)

    def _div_modes(self, U: VectorField) -> np.ndarray:
        grid = self.grid
        vr_hat = np.fft.rfft(U.r_hat(), axis=1)
        vt_hat = np.fft.rfft(U.theta_hat(), axis=1)
        m_t = grid.ops.m_tilde
        return self._D @ vr_hat + (1j * m_t[None, :]) * vt_hat / grid.r[:, None]

    def project(self, U: VectorField,
                g: SymmetricTensorField | None = None,
                g_inv: SymmetricTensorField | None = None):
        """Return (PU, q) with PU = U - g^{-1} G0 q.

        With no metric (or the identity) the solve is direct per mode;
        otherwise preconditioned CG on the same normal equations.
        """
        grid = self.grid
        grid.check_same(U.grid)
        if g is None or _is_identity(g):
            rhs = self._div_modes(U)
            lam_hat = self._solve_modes(rhs)
            cr, ct = self._gradient_modes(lam_hat)
            vr = U.r_hat() - np.fft.irfft(cr, n=grid.n_theta, axis=1)
            vt = U.theta_hat() - np.fft.irfft(ct, n=grid.n_theta, axis=1)
            PU = VectorField.from_polar(grid, vr, vt)
            lam = np.fft.irfft(lam_hat, n=grid.n_theta, axis=1)
            return PU, ScalarField(grid, lam)
        return self._project_metric(U, g, g_inv)

    # ------------- general SPD metric path -------------

    def _correction(self, lam: np.ndarray,
                    g_inv: SymmetricTensorField | None) -> VectorField:
        lam_hat = np.fft.rfft(lam, axis=1)
        cr, ct = self._gradient_modes(lam_hat)
        grid = self.grid
        corr = VectorField.from_polar(
            grid,
            np.fft.irfft(cr, n=grid.n_theta, axis=1),
            np.fft.irfft(ct, n=grid.n_theta, axis=1))
        if g_inv is not None:
            form = OneForm(grid, corr.c1, corr.c2)
            corr = g_inv.raise_form(form)
        return corr

    def _project_metric(self, U, g, g_inv):
        if g_inv is None:
            g_inv = g.inverse()
        g.check_spd()
        grid = self.grid
        o = grid.ops

        def apply_N(lam):
            corr = self._correction(lam, g_inv)
            return o.div(corr).data

        def precond(res_hat):
            return self._solve_modes(res_hat)

        rhs = o.div(U).data
        # CG on -W*N (SPD) with the identity-metric factorization as
        # preconditioner; everything in mode space for the preconditioner.
        lam = np.zeros(grid.shape)
        r = rhs - apply_N(lam)
        rhs_norm = ops.scalar_norm(ScalarField(grid, rhs)) or 1.0
        z = np.fft.irfft(precond(np.fft.rfft(r, axis=1)),
                         n=grid.n_theta, axis=1)
        p = z.copy()
        rz = float(np.sum(self.grid.w * r * z))
        it = 0
        while it < self.maxiter:
            res = ops.scalar_norm(ScalarField(grid, r)) / rhs_norm
            if res <= self.tol:
                break
            Np = apply_N(p)
            # inner products in the quadrature weight; N is w-symmetric
            pNp = -float(np.sum(self.grid.w * p * Np))
            alpha = rz / pNp
            lam = lam + alpha * p
            r = r + alpha * Np
            z = np.fft.irfft(precond(np.fft.rfft(r, axis=1)),
                             n=grid.n_theta, axis=1)
            rz_new = float(np.sum(self.grid.w * r * z))
            p = z + (rz_new / rz) * p
            rz = rz_new
            it += 1
        else:
            res = ops.scalar_norm(ScalarField(grid, r)) / rhs_norm
            if res > self.tol:
                raise SolverError(
                    f"projection CG stalled at relative residual {res:.3e}",
                    achieved=res)
        PU = U - self._correction(lam, g_inv)
        return PU, ScalarField(grid, lam)


def _is_identity(g: SymmetricTensorField) -> bool:
    return (np.all(g.t11 == 1.0) and np.all(g.t12 == 0.0)
            and np.all(g.t22 == 1.0))


_projectors: dict = {}


def projector_for(grid: Grid) -> LerayProjector:
    key = (id(grid), grid.n_r, grid.n_theta)
    P = _projectors.get(key)
    if P is None:
        P = LerayProjector(grid)
        _projectors[key] = P
    return P


def project(U: VectorField, b=None, grid: Grid | None = None):
    """Spec surface: project U onto divergence-free fields.

    ``b`` may be a BackgroundJet (its metric is used) or None for the
    identity metric.  Returns (PU, q).
    """
    grid = grid or U.grid
    P = projector_for(grid)
    if b is None:
        return P.project(U)
    return P.project(U, g=b.g, g_inv=b.g_inv)


def divergence_defect(W: VectorField, b=None) -> float:
    """Quadrature norm of kappa^{-1} d_a(kappa W^a)."""
    kappa = b.kappa if b is not None else None
    return ops.scalar_norm(ops.div(W, kappa))
