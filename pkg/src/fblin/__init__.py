"""Operator constructions for the linearized free-boundary incompressible
Euler problem on the unit disk: Leray-type projection with Dirichlet
potential, the normal operator and its collar regularization, tangential
vector-field families and Lie-derivative energies, the power-series data
lift, time evolution, and the verification diagnostics that go with them.
"""

from .grid import Grid, GridError, build_grid
from .fields import (OneForm, ScalarField, SymmetricTensorField, TwoForm,
                     VectorField, lower, raise_form)
from .operators import curl, div, grad, inner_product, norm
from .projection import LerayProjector, SolverError, divergence_defect, project

__all__ = [
    "Grid", "GridError", "build_grid",
    "ScalarField", "VectorField", "OneForm", "TwoForm",
    "SymmetricTensorField", "lower", "raise_form",
    "grad", "div", "curl", "inner_product", "norm",
    "LerayProjector", "SolverError", "project", "divergence_defect",
]

__version__ = "0.1.0"
