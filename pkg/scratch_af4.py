"""Prototype: 4th-order inner gradient + end-corrected quadrature weights."""
import numpy as np
from fblin import build_grid, VectorField, ScalarField
from fblin.fields import SymmetricTensorField


def deriv_stencil(nodes, x0, width):
    """Weights for f'(x0) from f(nodes) (exactness on polynomials)."""
    A = np.vander(nodes - x0, width, increasing=True).T
    b = np.zeros(width)
    b[1] = 1.0
    return np.linalg.solve(A, b)


def radial_matrix4(n, h, r):
    D = np.zeros((n, n))
    if n < 6:
        raise ValueError("need n >= 6 for 4th order")
    for j in range(n):
        lo = min(max(j - 2, 0), n - 5)
        idx = np.arange(lo, lo + 5)
        D[j, idx] = deriv_stencil(r[idx], r[j], 5)
    return D


def corrected_weights(grid):
    """w_j ~ r_j*h*dtheta with Euler-Maclaurin end corrections on psi = r*phi."""
    n, h, r = grid.n_r, grid.dr, grid.r
    w = r * h
    k = min(4, n)
    dR = deriv_stencil(r[-k:], 1.0, k)   # psi'(1) from psi samples
    dL = deriv_stencil(r[:k], 0.0, k)    # psi'(0)
    corr = np.zeros(n)
    corr[-k:] += (h * h / 24.0) * dR
    corr[:k] -= (h * h / 24.0) * dL
    # functional acts on psi = r*phi samples -> fold r into the weight
    return (w + corr * r * 0 + corr * 0, w, corr)


def build_w(grid):
    n, h, r = grid.n_r, grid.dr, grid.r
    w = r * h
    k = min(4, n)
    dR = deriv_stencil(r[-k:], 1.0, k)
    dL = deriv_stencil(r[:k], 0.0, k)
    corr = np.zeros(n)
    corr[-k:] += (h * h / 24.0) * dR * r[-k:]
    corr[:k] -= (h * h / 24.0) * dL * r[:k]
    return (w + corr) * grid.dtheta


for n in (32, 64, 128):
    grid = build_grid(n, n)
    h = grid.dr
    wr = build_w(grid)          # (n_r,) radial weights incl. dtheta
    W2 = np.outer(wr / grid.dtheta, np.ones(grid.n_theta)) * grid.dtheta

    # check quadrature orders: integral of exp(r)cos^2
    f = np.exp(grid.r)[:, None] * np.cos(grid.theta)[None, :] ** 2
    exact = np.pi * (1.0 + 0 - 0)  # int exp(r) r dr * pi
    from scipy.integrate import quad
    val = quad(lambda rr: np.exp(rr) * rr, 0, 1)[0] * np.pi
    print(n, "plain quad err:", abs(np.sum(grid.w * f) - val),
          "corrected err:", abs(np.sum(W2 * f) - val))

    # symmetry defect with D4 + corrected weights
    D4 = radial_matrix4(n, h, grid.r)

    def d_theta(a):
        F = np.fft.rfft(a, axis=1)
        m = np.fft.rfftfreq(grid.n_theta, 1.0 / grid.n_theta)
        m[-1] = 0.0
        return np.fft.irfft(F * 1j * m[None, :], n=grid.n_theta, axis=1)

    def grad4(q):
        fr = D4 @ q
        ft = d_theta(q) / grid.r[:, None]
        c1 = grid.cos[None, :] * fr - grid.sin[None, :] * ft
        c2 = grid.sin[None, :] * fr + grid.cos[None, :] * ft
        return c1, c2

    # projection machinery rebuilt on corrected weights
    from fblin.operators import DiskOperators
    o = grid.ops
    Wrad = wr / grid.dtheta
    D = o.div_radial_matrix
    G = -np.linalg.solve(np.diag(Wrad), D.T @ np.diag(Wrad))
    from scipy.linalg import cho_factor, cho_solve
    m_t = o.m_tilde
    chols = []
    base = G.T @ (Wrad[:, None] * G)
    for m in m_t:
        S = base + np.diag(m * m * Wrad / grid.r ** 2)
        chols.append(cho_factor(S, lower=True))

    def project2(U):
        vr = U.r_hat(); vt = U.theta_hat()
        vrh = np.fft.rfft(vr, axis=1); vth = np.fft.rfft(vt, axis=1)
        rhs = D @ vrh + 1j * m_t[None, :] * vth / grid.r[:, None]
        lam = np.empty_like(rhs)
        for mi in range(rhs.shape[1]):
            b = -(Wrad * rhs[:, mi])
            lam[:, mi] = cho_solve(chols[mi], b.real) + 1j * cho_solve(chols[mi], b.imag)
        cr = G @ lam
        ct = 1j * m_t[None, :] * lam / grid.r[:, None]
        pvr = vr - np.fft.irfft(cr, n=grid.n_theta, axis=1)
        pvt = vt - np.fft.irfft(ct, n=grid.n_theta, axis=1)
        return VectorField.from_polar(grid, pvr, pvt)

    def apply_A(Wf):
        hfield = -(grid.y1 * Wf.c1 + grid.y2 * Wf.c2)
        c1, c2 = grad4(hfield)
        return project2(VectorField(grid, -c1, -c2))

    def ip(X, Z):
        return float(np.sum(W2 * (X.c1 * Z.c1 + X.c2 * Z.c2)))

    def smooth_scalar(g, seed, deg=4):
        r0 = np.random.default_rng(seed)
        c = r0.standard_normal((deg + 1, deg + 1))
        out = np.zeros(g.shape)
        for p in range(deg + 1):
            for q in range(deg + 1 - p):
                out += c[p, q] * g.y1 ** p * g.y2 ** q
        return out

    defects = []
    for s in range(8):
        U = project2(VectorField(grid, smooth_scalar(grid, 100 + s), smooth_scalar(grid, 1100 + s)))
        Wf = project2(VectorField(grid, smooth_scalar(grid, 200 + s), smooth_scalar(grid, 1200 + s)))
        AU, AW = apply_A(U), apply_A(Wf)
        d = ip(U, AW) - ip(AU, Wf)
        defects.append(abs(d) / np.sqrt(ip(U, U) * ip(Wf, Wf)))
    print(n, "4th-order sym defect max:", max(defects))
    # idempotence/orthogonality still exact?
    U = project2(VectorField(grid, smooth_scalar(grid, 7), smooth_scalar(grid, 8)))
    PU = project2(U)
    print(n, "re-projection delta:", (PU - U).max_abs())
