"""Power-series data lift: trade initial data for forcing that vanishes
at t = 0 to the requested order.

The jets W_s are generated by differentiating the lowered equation in time
and projecting term by term; binomial coefficients are exact integers.
Only the finite polynomial lift is provided: runs of finite order never
need the smooth infinite-series variant.
"""

from __future__ import annotations

from math import comb, factorial

import numpy as np

from .fields import ScalarField, VectorField
from .grid import Grid
from .normal_ops import apply_Af, apply_mult
from .projection import divergence_defect, projector_for


def _zero(grid: Grid) -> VectorField:
    z = np.zeros(grid.shape)
    return VectorField(grid, z, z.copy())


def _is_zero(field) -> bool:
    return field.max_abs() == 0.0


def _A_s(s: int, W: VectorField, b, grid: Grid) -> VectorField:
    f = b.p_jet(s)
    if _is_zero(f) or _is_zero(W):
        return _zero(grid)
    return apply_Af(f, W, b, grid, check=False)[0]


def _G_s(s: int, W: VectorField, b, grid: Grid) -> VectorField:
    if _is_zero(W):
        return _zero(grid)
    if s == 0:
        # G_0 = P on divergence-free fields; apply the projection so the
        # identity is enforced rather than assumed
        P = projector_for(grid)
        return P.project(W)[0]
    alpha = b.g_jet(s)
    if _is_zero(alpha):
        return _zero(grid)
    return apply_mult(alpha, W, b, grid)


def _C_s(s: int, W: VectorField, b, grid: Grid) -> VectorField:
    alpha = b.omega_jet(s)
    if _is_zero(alpha) or _is_zero(W):
        return _zero(grid)
    return apply_mult(alpha, W, b, grid)


def jet_recursion(W0: VectorField, W1: VectorField, F_jets, r: int,
                  b, grid: Grid, div_tol: float = 1e-6):
    """Time jets W_0 .. W_{r+2} of the solution at t = 0.

    ``F_jets`` lists D_t^s F at t = 0 (missing entries count as zero).
    Raises if the background cannot supply jets up to order r + 1.
    """
    if r < 0:
        raise ValueError("order r must be >= 0")
    if b.j_max < r + 1:
        raise ValueError(
            f"background jets up to order {r + 1} required, have {b.j_max}")
    for name, W in (("W0", W0), ("W1", W1)):
        d = divergence_defect(W, b)
        if d > div_tol * max(1.0, W.max_abs()):
            raise ValueError(f"{name} is not divergence free "
                             f"(defect {d:.3e})")

    F_jets = list(F_jets)

    def F_jet(s):
        return F_jets[s] if s < len(F_jets) else _zero(grid)

    jets = [W0, W1]
    for level in range(r + 1):
        acc = _zero(grid)
        for s in range(level):
            acc = acc - comb(level, s) * _G_s(level - s, jets[s + 2], b, grid)
        for s in range(level + 1):
            c = comb(level, s)
            acc = acc - c * _G_s(level - s + 1, jets[s + 1], b, grid)
            acc = acc + c * _C_s(level - s, jets[s + 1], b, grid)
            acc = acc - c * _A_s(level - s, jets[s], b, grid)
            acc = acc + c * _G_s(level - s, F_jet(s), b, grid)
        jets.append(acc)
    return jets


class LiftedSeries:
    """Polynomial solution jet and the forcing that replaces it."""

    def __init__(self, jets, r: int, provider, grid: Grid, F=None):
        self.jets = jets
        self.r = r
        self.provider = provider
        self.grid = grid
        self.F = F

    def series(self, t: float) -> VectorField:
        out = self.jets[0].copy()
        for s in range(1, len(self.jets)):
            out = out + (t ** s / factorial(s)) * self.jets[s]
        return out

    def series_dot(self, t: float) -> VectorField:
        out = self.jets[1].copy()
        for s in range(2, len(self.jets)):
            out = out + (t ** (s - 1) / factorial(s - 1)) * self.jets[s]
        return out

    def series_ddot(self, t: float) -> VectorField:
        out = self.jets[2].copy()
        for s in range(3, len(self.jets)):
            out = out + (t ** (s - 2) / factorial(s - 2)) * self.jets[s]
        return out

    def forcing(self, t: float) -> VectorField:
        """F - L1 W_series at time t (vanishes to order r at t = 0)."""
        from .evolution import rhs_acceleration
        b = self.provider.at(t)
        F_t = self.F(t) if self.F is not None else _zero(self.grid)
        acc = rhs_acceleration(self.series(t), self.series_dot(t), F_t,
                               b, self.grid)
        return acc - self.series_ddot(t)


def assemble_series(jets, r: int, provider, grid: Grid, F=None) -> LiftedSeries:
    """Bundle the jets into t -> W_series and t -> replacement forcing."""
    return LiftedSeries(jets, r, provider, grid, F=F)
