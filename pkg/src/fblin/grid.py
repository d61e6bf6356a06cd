"""Polar cell-centered grid on the unit disk.

Radial nodes sit at cell centers r_j = (j+1/2)*dr with dr = 1/n_r, so there
is no node at the coordinate singularity r=0 and none on the boundary r=1.
Angles are uniform, theta_k = 2*pi*k/n_theta.  Quadrature is the midpoint
rule with weights w_jk = r_j*dr*dtheta; the angular direction doubles as a
trapezoid rule on a periodic interval and is spectrally accurate.
"""

from __future__ import annotations

import numpy as np


class GridError(ValueError):
    pass


class Grid:
    """Node layout, quadrature weights and boundary trace data.

    Attributes
    ----------
    n_r, n_theta : int
        Node counts.  n_theta must be even (real FFT mode pairing).
    r : (n_r,) radii of the rings.
    theta : (n_theta,) angles.
    rho : (n_r+1,) radii of the cell faces, rho_i = i*dr (rho[0]=0, rho[-1]=1).
    w : (n_r, n_theta) quadrature weights.
    d : (n_r,) distance to the boundary, 1 - r.
    boundary_w : (n_theta,) arc weights dtheta on the circle r = 1.
    """

    def __init__(self, n_r: int, n_theta: int):
        if n_r < 1:
            raise GridError(f"n_r must be >= 1, got {n_r}")
        if n_theta < 4 or n_theta % 2 != 0:
            raise GridError(f"n_theta must be even and >= 4, got {n_theta}")
        self.n_r = int(n_r)
        self.n_theta = int(n_theta)
        self.dr = 1.0 / n_r
        self.dtheta = 2.0 * np.pi / n_theta
        self.r = (np.arange(n_r) + 0.5) * self.dr
        self.theta = np.arange(n_theta) * self.dtheta
        self.rho = np.arange(n_r + 1) * self.dr
        self.w = np.outer(self.r * self.dr * self.dtheta, np.ones(n_theta))
        self.d = 1.0 - self.r
        self.boundary_w = np.full(n_theta, self.dtheta)
        self.cos = np.cos(self.theta)
        self.sin = np.sin(self.theta)
        # Cartesian node coordinates, shape (n_r, n_theta)
        self.y1 = np.outer(self.r, self.cos)
        self.y2 = np.outer(self.r, self.sin)
        self._ops = None  # lazily built spectral/FD workspace

    @property
    def shape(self) -> tuple:
        return (self.n_r, self.n_theta)

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)

    def same(self, other: "Grid") -> bool:
        return self.n_r == other.n_r and self.n_theta == other.n_theta

    def check_same(self, other: "Grid") -> None:
        if not self.same(other):
            raise GridError(
                f"grid mismatch: {self.shape} vs {other.shape}")

    @property
    def ops(self):
        """Differential-operator workspace (built on first use)."""
        if self._ops is None:
            from .operators import DiskOperators
            self._ops = DiskOperators(self)
        return self._ops

    def __repr__(self):
        return f"Grid(n_r={self.n_r}, n_theta={self.n_theta})"


def build_grid(n_r: int, n_theta: int) -> Grid:
    """Validated constructor; rejects odd n_theta and non-positive counts."""
    return Grid(n_r, n_theta)
