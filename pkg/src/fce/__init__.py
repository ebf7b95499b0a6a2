"""
FCE Solver
Functionally connected elements: piecewise fields with built-in continuity, solved by least-squares collocation
"""

from .basis import BasisSet, TensorBasisSet, build_basis_set, gll_rule
from .constraints import (
    BoundaryCondition, BoundarySpec, PointRef, RelativeConstraint, RelativeEdgeConstraint,
    apply_boundary, build_reparameterization,
)
from .exceptions import FceError
from .fce1d import FceField1D, Partition1D, build_field_1d, materialize_1d
from .fce2d import FceField2D, Mesh2D, build_field_2d, materialize_2d
from .solver import ProblemSpec, ScalingSpec, assemble, make_collocation, solve

__version__ = '0.1.0'

__all__ = [
    'BasisSet', 'TensorBasisSet', 'build_basis_set', 'gll_rule',
    'BoundaryCondition', 'BoundarySpec', 'PointRef', 'RelativeConstraint', 'RelativeEdgeConstraint',
    'apply_boundary', 'build_reparameterization', 'FceError',
    'FceField1D', 'Partition1D', 'build_field_1d', 'materialize_1d',
    'FceField2D', 'Mesh2D', 'build_field_2d', 'materialize_2d',
    'ProblemSpec', 'ScalingSpec', 'assemble', 'make_collocation', 'solve',
]
