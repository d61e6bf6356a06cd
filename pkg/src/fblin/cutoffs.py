"""Boundary-distance cutoff profiles for the collar regularization.

rho(d) equals d up to d = 1/4 and levels off at 1/2 from d = 3/4 on;
chi(s) rises from 0 (s <= 1/4) to 1 (s >= 3/4).  Both are C^2 monotone
quintic-smoothstep blends with analytic derivatives, so chi_eps' is the
exact derivative of the sampled chi_eps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import ScalarField
from .grid import Grid


def _s5(x):
    x = np.clip(x, 0.0, 1.0)
    return x ** 3 * (10.0 - 15.0 * x + 6.0 * x ** 2)


def _s5_d(x):
    inside = (x > 0.0) & (x < 1.0)
    x = np.clip(x, 0.0, 1.0)
    return np.where(inside, 30.0 * x ** 2 * (1.0 - x) ** 2, 0.0)


def _s5_anti(x):
    x = np.clip(x, 0.0, 1.0)
    return x ** 4 * (2.5 - 3.0 * x + x ** 2)


def rho_of_d(d):
    """Monotone C^2 profile: rho = d for d <= 1/4, rho = 1/2 for d >= 3/4."""
    d = np.asarray(d, dtype=float)
    u = np.clip((d - 0.25) * 2.0, 0.0, 1.0)
    return np.where(d <= 0.25, d,
                    0.25 + 0.5 * (u - _s5_anti(u)))


def rho_prime_of_d(d):
    d = np.asarray(d, dtype=float)
    u = np.clip((d - 0.25) * 2.0, 0.0, 1.0)
    return np.where(d <= 0.25, 1.0, 1.0 - _s5(u))


def chi(s):
    """0 for s <= 1/4, 1 for s >= 3/4, quintic blend between."""
    return _s5((np.asarray(s, dtype=float) - 0.25) * 2.0)


def chi_prime(s):
    return _s5_d((np.asarray(s, dtype=float) - 0.25) * 2.0) * 2.0


@dataclass(frozen=True)
class CutoffProfiles:
    """Analytic profile handles bound to one smoothing length."""

    eps: float

    def chi_eps(self, rho):
        return chi(np.asarray(rho) / self.eps)

    def chi_eps_prime(self, rho):
        """d/drho of chi(rho/eps)."""
        return chi_prime(np.asarray(rho) / self.eps) / self.eps


def cutoff_profiles(d: ScalarField, eps: float, d0: float = 0.5):
    """Sampled (rho, chi_eps, chi_eps') for a boundary-distance field.

    eps must lie in (0, d0/2]; d is expected to be 1 - |y|.
    """
    if not (0.0 < eps <= d0 / 2.0):
        raise ValueError(f"eps must lie in (0, {d0 / 2}], got {eps}")
    grid = d.grid
    prof = CutoffProfiles(eps)
    rho = rho_of_d(d.data)
    return (ScalarField(grid, rho),
            ScalarField(grid, prof.chi_eps(rho)),
            ScalarField(grid, prof.chi_eps_prime(rho)))


def collar_fields(grid: Grid, eps: float):
    """rho, rho', chi_eps'(rho) sampled on the rings (radial profiles)."""
    prof = CutoffProfiles(eps)
    rho = rho_of_d(grid.d)
    return rho, rho_prime_of_d(grid.d), prof.chi_eps_prime(rho)
