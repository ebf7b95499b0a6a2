"""
Unit Tests for Boundary and Relative Constraints
================================================

Exact absorption of boundary data, least-squares registration and the
θ -> Θ reparameterization for eliminated parameters.
"""

import unittest

import numpy as np
import pytest

from fce.constraints import (
    EXACT, LEAST_SQUARES, BoundaryCondition, BoundarySpec, Elimination, PointRef, RelativeConstraint,
    RelativeEdgeConstraint, Reparameterization, apply_boundary, build_reparameterization,
    condition_block, relative_blocks, relative_supports_exact, supports_exact,
)
from fce.exceptions import ConfigurationError, ConstraintError, DataError, ModeError
from fce.fce1d import Partition1D, build_field_1d, materialize_1d
from fce.fce2d import Mesh2D, build_field_2d, materialize_2d


class TestBoundaryCondition(unittest.TestCase):
    """Test condition records"""

    def test_weights(self):
        """Test (a, b) per kind"""
        self.assertEqual(BoundaryCondition.dirichlet('left', 1.0).weights, (1.0, 0.0))
        self.assertEqual(BoundaryCondition.neumann('left', 1.0).weights, (0.0, 1.0))
        self.assertEqual(BoundaryCondition.robin('left', 2.0, 3.0, 1.0).weights, (2.0, 3.0))

    def test_processing_order(self):
        """Test Dirichlet is applied before Neumann and Robin"""
        spec = BoundarySpec((
            BoundaryCondition.robin('right', 1.0, 1.0, 0.0),
            BoundaryCondition.neumann('left', 0.0),
            BoundaryCondition.dirichlet('left', 1.0),
        ))
        self.assertEqual([c.kind for c in spec], ['dirichlet', 'neumann', 'robin'])

    def test_with_mode(self):
        """Test switching every condition to least squares"""
        spec = BoundarySpec((BoundaryCondition.dirichlet('left', 1.0),)).with_mode(LEAST_SQUARES)
        self.assertEqual(spec.conditions[0].mode, LEAST_SQUARES)

    def test_invalid(self):
        """Test rejected records"""
        with self.assertRaises(ConfigurationError):
            BoundaryCondition('left', 'cauchy', 1.0)
        with self.assertRaises(ConfigurationError):
            BoundaryCondition.robin('left', 0.0, 0.0, 1.0)
        with self.assertRaises(ConfigurationError):
            BoundaryCondition.dirichlet('left', 1.0, mode='soft')


class TestBoundary1D(unittest.TestCase):
    """Test boundary data on 1D fields"""

    def setUp(self):
        self.partition = Partition1D.uniform(0.0, 1.0, 4)

    def test_dirichlet_and_neumann_fix_entries(self):
        """Test u(a) and u'(b) become fixed parameters"""
        field_ = build_field_1d(self.partition, 'C1', 5, boundary=BoundarySpec((
            BoundaryCondition.dirichlet('left', 1.0),
            BoundaryCondition.neumann('right', 0.0),
        )))
        self.assertEqual(field_.fixed, {('alpha', 0): 1.0, ('beta', 4): 0.0})
        self.assertEqual(field_.free_count, 16)

    def test_supports_exact(self):
        """Test which kinds absorb which conditions"""
        c0 = build_field_1d(self.partition, 'C0', 4)
        nc = build_field_1d(self.partition, 'NC', 4)
        self.assertTrue(supports_exact(c0, BoundaryCondition.dirichlet('left', 0.0)))
        self.assertFalse(supports_exact(c0, BoundaryCondition.neumann('left', 0.0)))
        self.assertFalse(supports_exact(nc, BoundaryCondition.dirichlet('left', 0.0)))
        self.assertTrue(supports_exact(c0, BoundaryCondition.robin('left', 2.0, 0.0, 1.0)))

    def test_neumann_exact_on_c0(self):
        """Test ModeError for exact Neumann on a C0 field"""
        field_ = build_field_1d(self.partition, 'C0', 4)
        with self.assertRaises(ModeError):
            apply_boundary(field_, [BoundaryCondition.neumann('right', 0.0)])

    def test_conflicting_data(self):
        """Test two Dirichlet values on the same end"""
        field_ = build_field_1d(self.partition, 'C0', 4)
        with self.assertRaises(DataError):
            apply_boundary(field_, [BoundaryCondition.dirichlet('left', 0.0), BoundaryCondition.dirichlet('left', 1.0)])

    def test_unknown_side(self):
        """Test 2D side names on a 1D field"""
        field_ = build_field_1d(self.partition, 'C0', 4)
        with self.assertRaises(ConfigurationError):
            apply_boundary(field_, [BoundaryCondition.dirichlet('top', 0.0)])

    def test_robin_elimination(self):
        """Test 2u + 3u' = 5 at the right end holds for every θ"""
        field_ = build_field_1d(self.partition, 'C1', 5, boundary=[BoundaryCondition.robin('right', 2.0, 3.0, 5.0)])
        reparam = build_reparameterization(field_)
        self.assertEqual(reparam.size, reparam.full_size - 1)
        self.assertTrue(reparam.affine)
        rng = np.random.default_rng(3)
        for _ in range(3):
            Theta = reparam.full(rng.standard_normal(reparam.size))
            u = materialize_1d(reparam.field, Theta, [1.0])[0]
            du = materialize_1d(reparam.field, Theta, [1.0], deriv=1)[0]
            self.assertAlmostEqual(2.0 * u + 3.0 * du, 5.0, places=11)

    def test_robin_with_known_value(self):
        """Test a Robin condition collapses to a fixed slope when u is already fixed"""
        field_ = build_field_1d(self.partition, 'C1', 5, boundary=[
            BoundaryCondition.dirichlet('left', 1.0),
            BoundaryCondition.robin('left', 1.0, 2.0, 3.0),
        ])
        self.assertAlmostEqual(field_.fixed[('beta', 0)], 1.0)
        self.assertEqual(field_.eliminations, ())

    def test_least_squares_registration(self):
        """Test least-squares conditions leave the layout alone and produce residual rows"""
        field_ = build_field_1d(self.partition, 'NC', 4)
        relaxed = apply_boundary(field_, [BoundaryCondition.dirichlet('left', 2.0, mode=LEAST_SQUARES)])
        self.assertEqual(relaxed.free_count, field_.free_count)
        block = condition_block(relaxed, relaxed.ls_conditions[0])
        theta = np.random.default_rng(5).standard_normal(relaxed.free_count)
        u = materialize_1d(relaxed, theta, [0.0])[0]
        self.assertAlmostEqual(block.evaluate(theta)[0], u - 2.0, places=12)


class TestReparameterization:
    """Test θ -> Θ for relative constraints"""

    @staticmethod
    def _relbc_field():
        return build_field_1d(Partition1D.uniform(0.0, 1.0, 4), 'C1', 6)

    def test_identity_without_constraints(self, c1_field):
        """Test the map is the identity when nothing is eliminated"""
        reparam = build_reparameterization(c1_field)
        theta = np.arange(reparam.size, dtype=float)
        np.testing.assert_array_equal(reparam.full(theta), theta)
        np.testing.assert_array_equal(reparam.jacobian(theta), np.eye(reparam.size))
        np.testing.assert_array_equal(reparam.reduce(reparam.full(theta)), theta)

    def test_linear_relative(self, rng):
        """Test u(0) = u(0.5) + 1 and u'(1) = u'(0.5) + π for every θ"""
        field_ = self._relbc_field()
        reparam = build_reparameterization(field_, [
            RelativeConstraint.linear(PointRef(0.0), [PointRef(0.5)], [1.0], offset=1.0),
            RelativeConstraint.linear(PointRef(1.0, 1), [PointRef(0.5, 1)], [1.0], offset=np.pi),
        ])
        assert reparam.size == field_.free_count - 2
        assert reparam.affine
        for _ in range(3):
            Theta = reparam.full(rng.standard_normal(reparam.size))
            u = materialize_1d(reparam.field, Theta, [0.0, 0.5])
            du = materialize_1d(reparam.field, Theta, [0.5, 1.0], deriv=1)
            assert u[0] == pytest.approx(u[1] + 1.0, abs=1e-11)
            assert du[1] == pytest.approx(du[0] + np.pi, abs=1e-10)

    def test_nonlinear_jacobian(self, rng):
        """Test the Jacobian of u(0) = u(0.5)^3 against finite differences"""
        field_ = self._relbc_field()
        reparam = build_reparameterization(field_, [
            RelativeConstraint.nonlinear(PointRef(0.0), [PointRef(0.5)],
                                         lambda v: v[0] ** 3, lambda v: np.array([3.0 * v[0] ** 2])),
        ])
        assert not reparam.affine
        theta = rng.standard_normal(reparam.size)
        E = reparam.jacobian(theta)
        eps = 1e-6
        for k in rng.choice(reparam.size, 5, replace=False):
            step = np.zeros(reparam.size)
            step[k] = eps
            fd = (reparam.full(theta + step) - reparam.full(theta - step)) / (2 * eps)
            np.testing.assert_allclose(E[:, k], fd, atol=1e-6)

    def test_chained_eliminations(self):
        """Test eliminations depending on other eliminated entries are evaluated in order"""
        field_ = self._relbc_field()
        reparam = build_reparameterization(field_, [
            RelativeConstraint.linear(PointRef(0.0), [PointRef(0.25)], [2.0]),
            RelativeConstraint.linear(PointRef(0.25), [PointRef(0.5)], [1.0], offset=1.0),
        ])
        Theta = reparam.full(np.zeros(reparam.size))
        u = materialize_1d(reparam.field, Theta, [0.0, 0.25, 0.5])
        np.testing.assert_allclose(u, [2.0, 1.0, 0.0], atol=1e-12)

    def test_cycle(self, c1_field):
        """Test cyclic eliminations are rejected"""
        with pytest.raises(ConstraintError):
            Reparameterization(c1_field, [
                Elimination(('alpha', 0), (('alpha', 1),), (1.0,)),
                Elimination(('alpha', 1), (('alpha', 0),), (1.0,)),
            ])

    def test_self_reference(self, c1_field):
        """Test a constraint cannot define a value through itself"""
        with pytest.raises(ConstraintError):
            build_reparameterization(c1_field, [RelativeConstraint.linear(PointRef(0.5), [PointRef(0.5)], [2.0])])

    def test_target_already_fixed(self, partition4):
        """Test boundary data and an exact relative constraint cannot both set u(0)"""
        field_ = build_field_1d(partition4, 'C1', 5, boundary=[BoundaryCondition.dirichlet('left', 0.0)])
        with pytest.raises(ConstraintError):
            build_reparameterization(field_, [RelativeConstraint.linear(PointRef(0.0), [PointRef(0.5)], [1.0])])

    def test_exact_needs_interface_parameters(self, partition4):
        """Test exact mode availability by kind and location"""
        c0 = build_field_1d(partition4, 'C0', 5)
        nc = build_field_1d(partition4, 'NC', 5)
        slope = RelativeConstraint.linear(PointRef(1.0, 1), [PointRef(0.5, 1)], [1.0])
        inside = RelativeConstraint.linear(PointRef(0.3), [PointRef(0.5)], [1.0])
        assert not relative_supports_exact(c0, slope)
        assert not relative_supports_exact(nc, inside)
        assert not relative_supports_exact(c0, inside)
        with pytest.raises(ModeError):
            build_reparameterization(c0, [slope])
        with pytest.raises(ConfigurationError):
            build_reparameterization(c0, [inside])

    def test_least_squares_relative(self, c0_field, rng):
        """Test least-squares relative constraints are registered with their residual blocks"""
        constraint = RelativeConstraint.linear(PointRef(0.3), [PointRef(0.7)], [2.0], offset=0.5, mode=LEAST_SQUARES)
        reparam = build_reparameterization(c0_field, [constraint])
        assert reparam.size == c0_field.free_count
        target, sources, offsets = relative_blocks(reparam.field, reparam.field.ls_relative[0])
        theta = rng.standard_normal(reparam.size)
        u = materialize_1d(reparam.field, theta, [0.3, 0.7])
        residual = target.evaluate(theta) - 2.0 * sources[0].evaluate(theta) - offsets
        assert residual[0] == pytest.approx(u[0] - 2.0 * u[1] - 0.5, abs=1e-12)

    def test_invalid_constraints(self):
        """Test malformed relative constraints"""
        with pytest.raises(ConfigurationError):
            RelativeConstraint(PointRef(0.0), (PointRef(0.5),))
        with pytest.raises(ConfigurationError):
            RelativeConstraint(PointRef(0.0), (PointRef(0.5),), function=lambda v: v[0])
        with pytest.raises(ConfigurationError):
            RelativeConstraint.linear(PointRef(0.0), [PointRef(0.5)], [1.0, 2.0])
        with pytest.raises(ConfigurationError):
            PointRef(0.0, 2)


class TestRelativeEdge:
    """Test u(x_t, y) = u(x_s, y) + jump(y) on 2D fields"""

    @staticmethod
    def _jump(y, d=0):
        y = np.asarray(y, dtype=float)
        return [np.sin(np.pi * y), np.pi * np.cos(np.pi * y), -np.pi ** 2 * np.sin(np.pi * y)][d]

    @pytest.mark.parametrize('kind', ['C0', 'C1'])
    def test_exact_edge_link(self, rng, kind):
        """Test the linked line reproduces the source line plus the jump for every θ"""
        field_ = build_field_2d(Mesh2D.uniform(((0.0, 1.0), (0.0, 1.0)), 4, 2), kind, 5)
        reparam = build_reparameterization(field_, [RelativeEdgeConstraint(0.0, 0.5, self._jump)])
        assert reparam.size < field_.free_count
        y = np.linspace(0.0, 1.0, 11)
        for _ in range(3):
            Theta = reparam.full(rng.standard_normal(reparam.size))
            left = materialize_2d(reparam.field, Theta, np.zeros_like(y), y)
            mid = materialize_2d(reparam.field, Theta, np.full_like(y, 0.5), y)
            np.testing.assert_allclose(left - mid, self._jump(y), atol=1e-11)

    def test_zero_jump_least_squares(self, mesh22, rng):
        """Test least-squares edge constraints measure the line difference"""
        field_ = build_field_2d(mesh22, 'NC', 3)
        zero = RelativeEdgeConstraint(0.0, 1.0, lambda y, d=0: np.zeros_like(np.asarray(y, dtype=float)),
                                      mode=LEAST_SQUARES)
        assert not relative_supports_exact(field_, zero.with_mode(EXACT))
        reparam = build_reparameterization(field_, [zero])
        y = np.array([0.1, 0.6])
        target, sources, offsets = relative_blocks(reparam.field, zero, y)
        theta = rng.standard_normal(reparam.size)
        expected = (materialize_2d(reparam.field, theta, np.zeros(2), y)
                    - materialize_2d(reparam.field, theta, np.ones(2), y))
        np.testing.assert_allclose(target.evaluate(theta) - sources[0].evaluate(theta) - offsets, expected, atol=1e-12)

    def test_line_to_itself(self, mesh22):
        """Test a line cannot be linked to itself"""
        field_ = build_field_2d(mesh22, 'C0', 4)
        with pytest.raises(ConstraintError):
            build_reparameterization(field_, [RelativeEdgeConstraint(0.5, 0.5, self._jump)])
