"""Tangential vector-field families and Lie derivatives.

S0 holds the rotation field (-y2, y1), the single generator of boundary
rotations in 2D; its directional derivative is evaluated spectrally in
theta (plus the exact algebraic rotation term), so the most frequently
used tangential derivative carries no radial FD error.  S1 holds smooth
divergence-free fields compactly supported in the interior (zero where
d < d0/2), built from the plateau/ramp pattern (f(u1) g'(u2), -f'(u1) g(u2))
translated over the inner disk.  R is the radial field c1 * y.

Lie derivatives are implemented per tensor kind; D_t is handled
symbolically: the caller supplies the time jet of the argument.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import (OneForm, ScalarField, SymmetricTensorField, TwoForm,
                     VectorField)
from .grid import Grid

D_T = "Dt"


# ---------------- smooth profile functions ----------------

def smoothstep(x):
    """Quintic 0->1 step with vanishing first and second end derivatives."""
    x = np.clip(x, 0.0, 1.0)
    return x ** 3 * (10.0 - 15.0 * x + 6.0 * x ** 2)


def smoothstep_d(x):
    inside = (x > 0.0) & (x < 1.0)
    x = np.clip(x, 0.0, 1.0)
    return np.where(inside, 30.0 * x ** 2 * (1.0 - x) ** 2, 0.0)


def plateau(s):
    """Smooth bump: (1 - 4 s^2)^4 on |s| <= 1/2, zero outside (C^3)."""
    u = np.clip(1.0 - 4.0 * s * s, 0.0, None)
    return u ** 4


def plateau_d(s):
    u = np.clip(1.0 - 4.0 * s * s, 0.0, None)
    return -32.0 * s * u ** 3


def _plateau_dd_poly(s):
    u = np.clip(1.0 - 4.0 * s * s, 0.0, None)
    return -32.0 * u ** 3 + 768.0 * s * s * u ** 2


def ramp(s):
    """g with g'(0) = 1 and g = 0 beyond |s| = 1/2."""
    return s * plateau(s)


def ramp_d(s):
    return plateau(s) + s * plateau_d(s)


# ---------------- family members ----------------

@dataclass
class FamilyMember:
    label: str
    kind: str                   # "S0" | "S1" | "R"
    field: VectorField
    jac: tuple                  # analytic (d1T1, d2T1, d1T2, d2T2)
    tangential: bool

    def directional(self, comp: np.ndarray) -> np.ndarray:
        """T^c d_c applied to one sampled component."""
        grid = self.field.grid
        o = grid.ops
        if self.kind == "S0":
            return o.d_theta(comp)
        fr = o.d_r(comp)
        ft = o.d_theta(comp) / grid.r[:, None]
        dx = grid.cos[None, :] * fr - grid.sin[None, :] * ft
        dy = grid.sin[None, :] * fr + grid.cos[None, :] * ft
        return self.field.c1 * dx + self.field.c2 * dy


def rotation_member(grid: Grid) -> FamilyMember:
    zero = np.zeros(grid.shape)
    one = np.ones(grid.shape)
    return FamilyMember(
        label="S0", kind="S0",
        field=VectorField(grid, -grid.y2, grid.y1),
        jac=(zero, -one, one, zero.copy()),
        tangential=True)


def radial_member(grid: Grid, c1: float) -> FamilyMember:
    zero = np.zeros(grid.shape)
    one = np.full(grid.shape, c1)
    return FamilyMember(
        label="R", kind="R",
        field=VectorField(grid, c1 * grid.y1, c1 * grid.y2),
        jac=(one, zero, zero.copy(), one.copy()),
        tangential=False)


def _pattern_member(grid: Grid, label, center, sigma, orientation):
    u1 = (grid.y1 - center[0]) / sigma
    u2 = (grid.y2 - center[1]) / sigma
    f1, df1 = plateau(u1), plateau_d(u1)
    g2, dg2 = ramp(u2), ramp_d(u2)
    f2, df2 = plateau(u2), plateau_d(u2)
    g1, dg1 = ramp(u1), ramp_d(u1)
    ddg2 = _ramp_dd(u2)
    ddf1 = _plateau_dd(u1)
    ddg1 = _ramp_dd(u1)
    ddf2 = _plateau_dd(u2)
    s = 1.0 / sigma
    if orientation == 0:
        # (f(u1) g'(u2), -f'(u1) g(u2)) : equals e1 on the core square
        c1 = f1 * dg2
        c2 = -df1 * g2
        jac = (df1 * dg2 * s, f1 * ddg2 * s,
               -ddf1 * g2 * s, -df1 * dg2 * s)
    else:
        c1 = -df2 * g1
        c2 = f2 * dg1
        jac = (-df2 * dg1 * s, -ddf2 * g1 * s,
               f2 * ddg1 * s, df2 * dg1 * s)
    return FamilyMember(label=label, kind="S1",
                        field=VectorField(grid, c1, c2), jac=jac,
                        tangential=True)


def _plateau_dd(s):
    return _plateau_dd_poly(s)


def _ramp_dd(s):
    return 2.0 * plateau_d(s) + s * _plateau_dd(s)


# Reference layout for the interior family, in units where the admissible
# support disk has radius 0.75 (the d0 = 1/2 case): one copy at the origin
# plus rings of four on the axes and four on the diagonals.  Squares of
# half-width sigma/2 = 0.3 centered at radius 0.3 stay inside radius 0.75
# and their cores overlap enough to span directions out to radius ~0.52.
_DIAG = 0.3 / np.sqrt(2.0)
S1_CENTERS = ((0.0, 0.0),
              (0.3, 0.0), (-0.3, 0.0), (0.0, 0.3), (0.0, -0.3),
              (_DIAG, _DIAG), (-_DIAG, _DIAG),
              (_DIAG, -_DIAG), (-_DIAG, -_DIAG))
S1_SIGMA = 0.6


class VectorFamily:
    """S0, S1, R and the D_t label, with the span bookkeeping of the
    combined families."""

    def __init__(self, grid: Grid, d0: float = 0.5, c1: float = 1.0):
        if not (0.0 < d0 < 1.0):
            raise ValueError(f"d0 must lie in (0,1), got {d0}")
        self.grid = grid
        self.d0 = d0
        self.c1 = c1
        self.s0 = [rotation_member(grid)]
        k = (1.0 - 0.5 * d0) / 0.75
        self.s1 = []
        for i, c in enumerate(S1_CENTERS):
            for orient in (0, 1):
                self.s1.append(_pattern_member(
                    grid, f"S1_{i}{'ab'[orient]}", (k * c[0], k * c[1]),
                    k * S1_SIGMA, orient))
        self.r = radial_member(grid, c1)

    @property
    def s(self):
        """The space-tangential family S = S0 u S1."""
        return self.s0 + self.s1

    def members(self, kind: str):
        """Members of the combined families by label: S, T, R-family, U."""
        if kind == "S":
            return list(self.s)
        if kind == "T":
            return list(self.s) + [D_T]
        if kind == "Rfam":
            return list(self.s) + [self.r]
        if kind == "U":
            return list(self.s) + [self.r, D_T]
        raise ValueError(f"unknown family {kind!r}")

    def by_label(self, label: str):
        if label == D_T:
            return D_T
        for m in self.s + [self.r]:
            if m.label == label:
                return m
        raise KeyError(label)

    def span_defect(self) -> float:
        """Worst node with d >= d0: how far the family is from spanning R^2.

        Returns the smallest (over such nodes) largest |det| over member
        pairs, normalized; positive means the directions are spanned.
        """
        grid = self.grid
        mask = grid.d[:, None] * np.ones((1, grid.n_theta)) >= self.d0
        best = np.zeros(grid.shape)
        mem = self.s
        for a in range(len(mem)):
            for b in range(a + 1, len(mem)):
                det = np.abs(mem[a].field.c1 * mem[b].field.c2
                             - mem[a].field.c2 * mem[b].field.c1)
                best = np.maximum(best, det)
        return float(np.min(best[mask])) if mask.any() else float("inf")


def build_families(d0: float, c1: float, grid: Grid) -> VectorFamily:
    return VectorFamily(grid, d0=d0, c1=c1)


# ---------------- Lie derivatives ----------------

def lie_derive(T, beta, b=None, grid: Grid | None = None, dt_jet=None):
    """L_T beta for any tensor kind.

    ``T`` is a FamilyMember or the label "Dt".  For T = "Dt" the time jet
    of beta must be supplied (backgrounds expose jets; evolved states
    expose their own derivatives through the equation).
    """
    if T == D_T:
        if dt_jet is None:
            raise ValueError("D_t Lie derivative needs the time jet of the "
                             "argument")
        return dt_jet
    grid = grid or beta.grid
    if isinstance(beta, ScalarField):
        return ScalarField(grid, T.directional(beta.data))
    if isinstance(beta, VectorField):
        d1t1, d2t1, d1t2, d2t2 = T.jac
        return VectorField(
            grid,
            T.directional(beta.c1) - (d1t1 * beta.c1 + d2t1 * beta.c2),
            T.directional(beta.c2) - (d1t2 * beta.c1 + d2t2 * beta.c2))
    if isinstance(beta, OneForm):
        d1t1, d2t1, d1t2, d2t2 = T.jac
        return OneForm(
            grid,
            T.directional(beta.c1) + d1t1 * beta.c1 + d1t2 * beta.c2,
            T.directional(beta.c2) + d2t1 * beta.c1 + d2t2 * beta.c2)
    if isinstance(beta, TwoForm):
        d1t1, d2t1, d1t2, d2t2 = T.jac
        return TwoForm(grid,
                       T.directional(beta.b12) + (d1t1 + d2t2) * beta.b12)
    if isinstance(beta, SymmetricTensorField):
        d1t1, d2t1, d1t2, d2t2 = T.jac
        t11 = (T.directional(beta.t11)
               + 2.0 * (d1t1 * beta.t11 + d1t2 * beta.t12))
        t12 = (T.directional(beta.t12)
               + d1t1 * beta.t12 + d1t2 * beta.t22
               + d2t1 * beta.t11 + d2t2 * beta.t12)
        t22 = (T.directional(beta.t22)
               + 2.0 * (d2t1 * beta.t12 + d2t2 * beta.t22))
        return SymmetricTensorField(grid, t11, t12, t22)
    raise TypeError(f"cannot Lie-derive {type(beta).__name__}")


def lie_multi(index, beta, b=None, grid: Grid | None = None,
              dt_jets=None):
    """Product of Lie derivatives, rightmost factor applied first.

    ``index`` is a sequence of FamilyMember / "Dt" entries; ``dt_jets``
    supplies the jet chain for any D_t factors (a callable mapping the
    current tensor to its time derivative).
    """
    out = beta
    for T in reversed(list(index)):
        if T == D_T:
            if dt_jets is None:
                raise ValueError("multi-index contains D_t but no jet "
                                 "supplier was given")
            out = dt_jets(out)
        else:
            out = lie_derive(T, out, b=b, grid=grid)
    return out
