"""Node-sampled tensor fields on the disk grid.

Vector fields and one-forms carry Cartesian components so nothing blows up
at the coordinate origin; conversion to polar (physical) components happens
inside the differential operators.  Two-forms store the single independent
component beta_12 (beta_21 = -beta_12).  The metric and its relatives are
symmetric 2x2 tensors stored as three component arrays.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .grid import Grid, GridError


def _as_grid_array(grid: Grid, a) -> np.ndarray:
    out = np.asarray(a, dtype=float)
    if out.shape != grid.shape:
        try:
            out = np.broadcast_to(out, grid.shape).copy()
        except ValueError:
            raise GridError(
                f"field shape {out.shape} != grid {grid.shape}") from None
    return out


@dataclass
class ScalarField:
    grid: Grid
    data: np.ndarray

    def __post_init__(self):
        self.data = _as_grid_array(self.grid, self.data)

    def __add__(self, o):
        return ScalarField(self.grid, self.data + _payload(o))

    def __sub__(self, o):
        return ScalarField(self.grid, self.data - _payload(o))

    def __mul__(self, o):
        return ScalarField(self.grid, self.data * _payload(o))

    __rmul__ = __mul__

    def __neg__(self):
        return ScalarField(self.grid, -self.data)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.data)))


def _payload(o):
    return o.data if isinstance(o, ScalarField) else o


@dataclass
class VectorField:
    """Contravariant components (W^1, W^2) in the Cartesian frame."""

    grid: Grid
    c1: np.ndarray
    c2: np.ndarray

    def __post_init__(self):
        self.c1 = _as_grid_array(self.grid, self.c1)
        self.c2 = _as_grid_array(self.grid, self.c2)

    @property
    def components(self):
        return (self.c1, self.c2)

    def __add__(self, o):
        return VectorField(self.grid, self.c1 + o.c1, self.c2 + o.c2)

    def __sub__(self, o):
        return VectorField(self.grid, self.c1 - o.c1, self.c2 - o.c2)

    def __mul__(self, s):
        s = _payload(s)
        return VectorField(self.grid, self.c1 * s, self.c2 * s)

    __rmul__ = __mul__

    def __neg__(self):
        return VectorField(self.grid, -self.c1, -self.c2)

    def copy(self):
        return VectorField(self.grid, self.c1.copy(), self.c2.copy())

    def max_abs(self) -> float:
        return float(max(np.max(np.abs(self.c1)), np.max(np.abs(self.c2))))

    def r_hat(self) -> np.ndarray:
        """Physical radial component cos*W1 + sin*W2."""
        g = self.grid
        return g.cos[None, :] * self.c1 + g.sin[None, :] * self.c2

    def theta_hat(self) -> np.ndarray:
        """Physical angular component -sin*W1 + cos*W2."""
        g = self.grid
        return -g.sin[None, :] * self.c1 + g.cos[None, :] * self.c2

    @staticmethod
    def from_polar(grid: Grid, vr: np.ndarray, vt: np.ndarray) -> "VectorField":
        c1 = grid.cos[None, :] * vr - grid.sin[None, :] * vt
        c2 = grid.sin[None, :] * vr + grid.cos[None, :] * vt
        return VectorField(grid, c1, c2)


@dataclass
class OneForm:
    """Covariant components (w_1, w_2) in the Cartesian frame."""

    grid: Grid
    c1: np.ndarray
    c2: np.ndarray

    def __post_init__(self):
        self.c1 = _as_grid_array(self.grid, self.c1)
        self.c2 = _as_grid_array(self.grid, self.c2)

    def __add__(self, o):
        return OneForm(self.grid, self.c1 + o.c1, self.c2 + o.c2)

    def __sub__(self, o):
        return OneForm(self.grid, self.c1 - o.c1, self.c2 - o.c2)

    def __mul__(self, s):
        s = _payload(s)
        return OneForm(self.grid, self.c1 * s, self.c2 * s)

    __rmul__ = __mul__

    def __neg__(self):
        return OneForm(self.grid, -self.c1, -self.c2)

    def r_hat(self) -> np.ndarray:
        g = self.grid
        return g.cos[None, :] * self.c1 + g.sin[None, :] * self.c2

    def theta_hat(self) -> np.ndarray:
        g = self.grid
        return -g.sin[None, :] * self.c1 + g.cos[None, :] * self.c2

    @staticmethod
    def from_polar(grid: Grid, wr: np.ndarray, wt: np.ndarray) -> "OneForm":
        c1 = grid.cos[None, :] * wr - grid.sin[None, :] * wt
        c2 = grid.sin[None, :] * wr + grid.cos[None, :] * wt
        return OneForm(grid, c1, c2)


@dataclass
class TwoForm:
    """Single independent component beta_12; beta_21 = -beta_12."""

    grid: Grid
    b12: np.ndarray

    def __post_init__(self):
        self.b12 = _as_grid_array(self.grid, self.b12)

    def __add__(self, o):
        return TwoForm(self.grid, self.b12 + o.b12)

    def __sub__(self, o):
        return TwoForm(self.grid, self.b12 - o.b12)

    def __mul__(self, s):
        return TwoForm(self.grid, self.b12 * _payload(s))

    __rmul__ = __mul__

    def contract(self, W: VectorField) -> OneForm:
        """(beta . W)_a = beta_ab W^b."""
        return OneForm(self.grid, self.b12 * W.c2, -self.b12 * W.c1)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.b12)))


@dataclass
class SymmetricTensorField:
    """Covariant symmetric tensor, components (t11, t12, t22)."""

    grid: Grid
    t11: np.ndarray
    t12: np.ndarray
    t22: np.ndarray

    def __post_init__(self):
        self.t11 = _as_grid_array(self.grid, self.t11)
        self.t12 = _as_grid_array(self.grid, self.t12)
        self.t22 = _as_grid_array(self.grid, self.t22)

    @staticmethod
    def identity(grid: Grid) -> "SymmetricTensorField":
        one = np.ones(grid.shape)
        zero = np.zeros(grid.shape)
        return SymmetricTensorField(grid, one, zero, one)

    @staticmethod
    def zero(grid: Grid) -> "SymmetricTensorField":
        z = np.zeros(grid.shape)
        return SymmetricTensorField(grid, z, z.copy(), z.copy())

    def __add__(self, o):
        return SymmetricTensorField(self.grid, self.t11 + o.t11,
                                    self.t12 + o.t12, self.t22 + o.t22)

    def __sub__(self, o):
        return SymmetricTensorField(self.grid, self.t11 - o.t11,
                                    self.t12 - o.t12, self.t22 - o.t22)

    def __mul__(self, s):
        s = _payload(s)
        return SymmetricTensorField(self.grid, self.t11 * s, self.t12 * s,
                                    self.t22 * s)

    __rmul__ = __mul__

    def det(self) -> np.ndarray:
        return self.t11 * self.t22 - self.t12 ** 2

    def is_spd(self, tol: float = 0.0) -> bool:
        return bool(np.all(self.det() > tol) and np.all(self.t11 > tol))

    def check_spd(self):
        if not self.is_spd():
            raise ValueError("tensor is not symmetric positive definite")

    def inverse(self) -> "SymmetricTensorField":
        det = self.det()
        return SymmetricTensorField(self.grid, self.t22 / det,
                                    -self.t12 / det, self.t11 / det)

    def contract(self, W: VectorField) -> OneForm:
        """(t . W)_a = t_ab W^b."""
        return OneForm(self.grid,
                       self.t11 * W.c1 + self.t12 * W.c2,
                       self.t12 * W.c1 + self.t22 * W.c2)

    def raise_form(self, w: OneForm) -> VectorField:
        """Treat self as the inverse metric: W^a = t^ab w_b."""
        return VectorField(self.grid,
                           self.t11 * w.c1 + self.t12 * w.c2,
                           self.t12 * w.c1 + self.t22 * w.c2)

    def max_abs(self) -> float:
        return float(max(np.max(np.abs(self.t11)), np.max(np.abs(self.t12)),
                         np.max(np.abs(self.t22))))


def lower(W: VectorField, g: SymmetricTensorField) -> OneForm:
    """w_a = g_ab W^b pointwise; g must be SPD."""
    g.check_spd()
    return g.contract(W)


def raise_form(w: OneForm, g_inv: SymmetricTensorField) -> VectorField:
    """W^a = g^ab w_b pointwise; g_inv must be SPD."""
    g_inv.check_spd()
    return g_inv.raise_form(w)


def dump_csv(field, path_or_buf) -> None:
    """One record per node: j,k,r,theta,<components>."""
    grid = field.grid
    if isinstance(field, ScalarField):
        names, cols = ["value"], [field.data]
    elif isinstance(field, (VectorField, OneForm)):
        names, cols = ["c1", "c2"], [field.c1, field.c2]
    elif isinstance(field, TwoForm):
        names, cols = ["b12"], [field.b12]
    elif isinstance(field, SymmetricTensorField):
        names = ["t11", "t12", "t22"]
        cols = [field.t11, field.t12, field.t22]
    else:
        raise TypeError(f"cannot dump {type(field).__name__}")

    own = isinstance(path_or_buf, (str, bytes))
    f = open(path_or_buf, "w", newline="") if own else path_or_buf
    try:
        wr = csv.writer(f)
        wr.writerow(["j", "k", "r", "theta"] + names)
        for j in range(grid.n_r):
            for k in range(grid.n_theta):
                wr.writerow([j, k, repr(grid.r[j]), repr(grid.theta[k])]
                            + [repr(c[j, k]) for c in cols])
    finally:
        if own:
            f.close()


def dumps_csv(field) -> str:
    buf = io.StringIO()
    dump_csv(field, buf)
    return buf.getvalue()
