"""
Unit Tests for the Least-Squares Collocation Solver
===================================================

Collocation nodes, residual assembly, row scaling and the linear and
Gauss-Newton solve paths.
"""

import unittest

import numpy as np
import pytest
from numpy.polynomial import legendre as npleg

from fce.config import GaussNewtonConfig, LeastSquaresConfig
from fce.constraints import LEAST_SQUARES, BoundaryCondition, PointRef, RelativeConstraint, build_reparameterization
from fce.exceptions import ConfigurationError, ConvergenceError, ModeError, ShapeError
from fce.fce1d import Partition1D, build_field_1d, materialize_1d
from fce.fce2d import Mesh2D, build_field_2d, materialize_2d
from fce.solver import (
    GLL, UNIFORM, CallableSystem, ProblemSpec, ScaleFactor, ScalingSpec, assemble, make_collocation,
    reference_nodes, solve, solve_gauss_newton, solve_least_squares, solve_linear,
)


def cubic_problem():
    """u'' = 6x, exact u = x^3"""
    return ProblemSpec.one_d(lambda x: 6.0 * x, c_xx=1.0)


def dirichlet_1d(left, right, mode='exact'):
    return [BoundaryCondition.dirichlet('left', left, mode), BoundaryCondition.dirichlet('right', right, mode)]


def square_problem():
    """u'' + u^2 = 2 + x^4, exact u = x^2"""
    return ProblemSpec.one_d(lambda x: 2.0 + x ** 4, c_xx=1.0,
                             nonlinear=lambda u: u ** 2, nonlinear_derivative=lambda u: 2.0 * u)


class TestProblemSpec(unittest.TestCase):
    """Test operator bookkeeping"""

    def test_orders(self):
        """Test highest derivative and required continuity per direction"""
        helmholtz = ProblemSpec.one_d(0.0, c_xx=1.0, c0=-1.0)
        self.assertEqual(helmholtz.order, (2,))
        self.assertEqual(helmholtz.required_continuity, (1,))
        advection = ProblemSpec.two_d(0.0, c_x=1.0, c_y=1.0)
        self.assertEqual(advection.required_continuity, (0, 0))
        heat = ProblemSpec.two_d(0.0, c_xx=-1.0, c_y=1.0)
        self.assertEqual(heat.required_continuity, (1, 0))

    def test_zero_terms_dropped(self):
        """Test constant zero coefficients do not create terms"""
        problem = ProblemSpec.one_d(0.0, c_xx=1.0, c_x=0.0, c0=lambda x: 1.0 + x ** 2)
        self.assertEqual(set(problem.terms), {(2,), (0,)})
        self.assertTrue(problem.linear)
        np.testing.assert_allclose(problem.coefficients((np.array([0.0, 2.0]),))[(0,)], [1.0, 5.0])

    def test_invalid(self):
        """Test rejected problem definitions"""
        with self.assertRaises(ConfigurationError):
            ProblemSpec.one_d(0.0)
        with self.assertRaises(ConfigurationError):
            ProblemSpec(3, {(0, 0, 0): 1.0}, 0.0)
        with self.assertRaises(ConfigurationError):
            ProblemSpec(1, {(3,): 1.0}, 0.0)
        with self.assertRaises(ConfigurationError):
            ProblemSpec.one_d(0.0, c_xx=1.0, nonlinear=np.sin)


class TestCollocation(unittest.TestCase):
    """Test collocation node sets"""

    def test_uniform_1d(self):
        """Test uniform nodes on two elements share the breakpoint"""
        colloc = make_collocation(Partition1D.uniform(0.0, 1.0, 2), UNIFORM, 3)
        self.assertEqual(colloc.size, 6)
        np.testing.assert_allclose(colloc.element_points(1)[0], [0.5, 0.75, 1.0])
        edges = colloc.shared_edges()
        self.assertEqual(len(edges), 1)
        np.testing.assert_allclose(edges[0].x, [0.5])
        np.testing.assert_allclose(colloc.line_points(0), [0.0, 0.25, 0.5, 0.75, 1.0])

    def test_gll_interior_nodes(self):
        """Test interior GLL nodes are the roots of P'_{q-1}"""
        nodes = reference_nodes(GLL, 7)
        roots = np.sort(npleg.Legendre.basis(6).deriv().roots())
        np.testing.assert_allclose(nodes[1:-1], roots, atol=1e-13)
        self.assertEqual((nodes[0], nodes[-1]), (-1.0, 1.0))

    def test_gll_2d(self):
        """Test tensor nodes and the shared vertical edge on a 2 x 1 mesh"""
        colloc = make_collocation(Mesh2D.uniform(((0.0, 1.0), (0.0, 1.0)), 2, 1), GLL, 4)
        self.assertEqual(colloc.size, 32)
        x, y = colloc.element_points((1, 0))
        self.assertEqual(x.size, 16)
        self.assertTrue(np.all(x >= 0.5))
        edges = colloc.shared_edges()
        self.assertEqual(len(edges), 1)
        np.testing.assert_allclose(edges[0].x, np.full(4, 0.5))
        np.testing.assert_allclose(edges[0].y, 0.5 * (reference_nodes(GLL, 4) + 1.0))
        self.assertEqual(edges[0].first, (0, 0))
        self.assertEqual(edges[0].second, (1, 0))
        self.assertEqual(colloc.side_points('bottom').size, 7)

    def test_invalid(self):
        """Test rejected node requests"""
        with self.assertRaises(ConfigurationError):
            reference_nodes(GLL, 1)
        with self.assertRaises(ConfigurationError):
            reference_nodes('chebyshev', 4)


class TestScaling(unittest.TestCase):
    """Test row-weight parsing"""

    def test_scale_factor(self):
        """Test numbers and powers of h"""
        factor = ScaleFactor.parse('2*h^-4')
        self.assertEqual((factor.coefficient, factor.h_power), (2.0, -4.0))
        self.assertAlmostEqual(factor.value(0.5), 32.0)
        self.assertEqual(ScaleFactor.parse('3').value(0.1), 3.0)
        self.assertEqual(ScaleFactor.parse('h^-2').value(0.5), 4.0)

    def test_spec_round_trip(self):
        """Test the textual form survives parse and str"""
        spec = ScalingSpec.parse('1,h^-4,h^-2')
        self.assertEqual(str(spec), '1,h^-4,h^-2')
        self.assertEqual(spec.resolve(0.5), (1.0, 16.0, 4.0))

    def test_sinusoid_default(self):
        """Test defaults by problem order"""
        self.assertEqual(ScalingSpec.sinusoid_default(2).resolve(0.5), (16.0, 16.0, 4.0))
        self.assertEqual(ScalingSpec.sinusoid_default(1).resolve(0.5), (4.0, 4.0, 1.0))

    def test_invalid(self):
        """Test rejected scaling text"""
        for text in ('abc', '-2', '0'):
            with self.assertRaises(ConfigurationError):
                ScaleFactor.parse(text)
        with self.assertRaises(ConfigurationError):
            ScalingSpec.parse('1,2')


class TestAssembly:
    """Test residual row structure"""

    def test_c1_rows_are_pde_only(self, partition4):
        """Test a C1 field with exact end data adds no continuity or boundary rows"""
        field_ = build_field_1d(partition4, 'C1', 5, boundary=dirichlet_1d(0.0, 1.0))
        system = assemble(cubic_problem(), field_, colloc=make_collocation(partition4, GLL, 7))
        assert system.row_counts() == {'pde': 28}
        assert system.shape == (28, field_.free_count)
        assert system.affine

    def test_nc_rows(self, partition4):
        """Test NC adds value and slope continuity at each interior breakpoint plus two boundary rows"""
        field_ = build_field_1d(partition4, 'NC', 5, boundary=dirichlet_1d(0.0, 1.0, LEAST_SQUARES))
        system = assemble(cubic_problem(), field_, colloc=make_collocation(partition4, GLL, 7))
        assert system.row_counts() == {'pde': 28, 'continuity': 6, 'boundary': 2}

    def test_c0_rows(self, partition4):
        """Test C0 adds only slope continuity rows"""
        field_ = build_field_1d(partition4, 'C0', 5, boundary=dirichlet_1d(0.0, 1.0))
        system = assemble(cubic_problem(), field_, colloc=make_collocation(partition4, GLL, 7))
        assert system.row_counts() == {'pde': 28, 'continuity': 3}

    def test_continuity_scaling(self, partition4, rng):
        """Test σ1 multiplies the slope continuity rows"""
        field_ = build_field_1d(partition4, 'C0', 5, boundary=dirichlet_1d(0.0, 1.0))
        colloc = make_collocation(partition4, GLL, 7)
        plain = assemble(cubic_problem(), field_, colloc=colloc)
        scaled = assemble(cubic_problem(), field_, colloc=colloc, scaling=ScalingSpec.parse('1,1,h^-2'))
        theta = rng.standard_normal(plain.n_cols)
        np.testing.assert_allclose(scaled.residual(theta)[28:], 16.0 * plain.residual(theta)[28:], rtol=1e-12)
        np.testing.assert_allclose(scaled.residual(theta)[:28], plain.residual(theta)[:28])

    def test_linear_system_matches_residual(self, partition4, rng):
        """Test r(θ) = H θ - S"""
        field_ = build_field_1d(partition4, 'NC', 4, boundary=dirichlet_1d(1.0, 2.0, LEAST_SQUARES))
        system = assemble(cubic_problem(), field_, colloc=make_collocation(partition4, UNIFORM, 5))
        H, S = system.linear_system()
        theta = rng.standard_normal(system.n_cols)
        np.testing.assert_allclose(H @ theta - S, system.residual(theta), atol=1e-10)

    def test_nonlinear_jacobian(self, partition4, rng):
        """Test the assembled Jacobian against finite differences"""
        field_ = build_field_1d(partition4, 'NC', 5, boundary=dirichlet_1d(0.0, 1.0, LEAST_SQUARES))
        relative = RelativeConstraint.nonlinear(PointRef(0.1), [PointRef(0.6)], lambda v: np.sin(v[0]),
                                                lambda v: np.array([np.cos(v[0])]), mode=LEAST_SQUARES)
        reparam = build_reparameterization(field_, [relative])
        system = assemble(square_problem(), field_, reparam, make_collocation(partition4, GLL, 6))
        assert not system.affine
        assert system.row_counts()['relative'] == 1
        theta = 0.3 * rng.standard_normal(system.n_cols)
        J = system.jacobian(theta)
        eps = 1e-6
        for k in rng.choice(system.n_cols, 6, replace=False):
            step = np.zeros(system.n_cols)
            step[k] = eps
            fd = (system.residual(theta + step) - system.residual(theta - step)) / (2 * eps)
            np.testing.assert_allclose(J[:, k], fd, rtol=1e-5, atol=1e-5)
        with pytest.raises(ModeError):
            system.linear_system()

    def test_over_continuous_field(self, partition4):
        """Test a C1 field cannot be paired with a first-order problem"""
        field_ = build_field_1d(partition4, 'C1', 5)
        with pytest.raises(ConfigurationError):
            assemble(ProblemSpec.one_d(0.0, c_x=1.0, c0=1.0), field_, colloc=make_collocation(partition4, GLL, 6))

    def test_dimension_mismatch(self, partition4, mesh21):
        """Test 1D problems need 1D fields"""
        field_ = build_field_2d(mesh21, 'C0', 4)
        with pytest.raises(ConfigurationError):
            assemble(cubic_problem(), field_, colloc=make_collocation(mesh21, GLL, 5))
        with pytest.raises(ConfigurationError):
            assemble(cubic_problem(), build_field_1d(partition4, 'C1', 5))


class TestEndToEnd:
    """Test solves whose exact solution lies in the trial space"""

    @pytest.mark.parametrize('kind,mode', [('C1', 'exact'), ('C0', 'exact'), ('NC', LEAST_SQUARES)])
    def test_cubic_1d(self, skewed_partition, kind, mode):
        """Test u = x^3 is recovered on a non-uniform partition"""
        a, b = skewed_partition.a, skewed_partition.b
        field_ = build_field_1d(skewed_partition, kind, 5, boundary=dirichlet_1d(a ** 3, b ** 3, mode))
        system = assemble(cubic_problem(), field_, colloc=make_collocation(skewed_partition, GLL, 7))
        result = solve(system)
        assert result.method == 'qr'
        xs = np.linspace(a, b, 31)
        values = materialize_1d(system.field, system.full(result.theta), xs)
        np.testing.assert_allclose(values, xs ** 3, atol=1e-9)

    def test_poisson_2d(self, mesh21):
        """Test u = x^2 y^2 for Δu = 2x^2 + 2y^2 with exact Dirichlet data"""
        def exact(x, y, kx=0, ky=0):
            dx = [x ** 2, 2 * x, 2 + 0 * x, 0 * x][kx]
            dy = [y ** 2, 2 * y, 2 + 0 * y, 0 * y][ky]
            return dx * dy

        spec = [BoundaryCondition.dirichlet(s, exact) for s in ('left', 'right', 'bottom', 'top')]
        field_ = build_field_2d(mesh21, 'C0', 4, boundary_spec=spec)
        problem = ProblemSpec.two_d(lambda x, y: 2 * x ** 2 + 2 * y ** 2, c_xx=1.0, c_yy=1.0)
        system = assemble(problem, field_, colloc=make_collocation(mesh21, GLL, 6))
        result = solve(system)
        x, y = np.meshgrid(np.linspace(0, 1, 9), np.linspace(0, 1, 9))
        values = materialize_2d(system.field, system.full(result.theta), x.ravel(), y.ravel())
        np.testing.assert_allclose(values, exact(x.ravel(), y.ravel()), atol=1e-9)

    def test_nonlinear_1d(self):
        """Test Gauss-Newton recovers u = x^2 for u'' + u^2 = 2 + x^4"""
        partition = Partition1D.uniform(0.0, 1.0, 2)
        field_ = build_field_1d(partition, 'C1', 5, boundary=dirichlet_1d(0.0, 1.0))
        system = assemble(square_problem(), field_, colloc=make_collocation(partition, GLL, 7))
        result = solve(system)
        assert result.method == 'gauss-newton'
        assert result.diagnostics.converged
        xs = np.linspace(0.0, 1.0, 21)
        values = materialize_1d(system.field, system.full(result.theta), xs)
        np.testing.assert_allclose(values, xs ** 2, atol=1e-9)


class TestLeastSquares(unittest.TestCase):
    """Test the linear least-squares paths"""

    def test_identity(self):
        """Test a square well-conditioned system"""
        sol = solve_least_squares(np.eye(3), [1.0, 2.0, 3.0])
        np.testing.assert_allclose(sol.theta, [1.0, 2.0, 3.0])
        self.assertEqual((sol.rank, sol.method), (3, 'qr'))
        self.assertAlmostEqual(sol.cond_est, 1.0)

    def test_mean(self):
        """Test the least-squares fit of a constant is the mean"""
        sol = solve_least_squares(np.ones((5, 1)), [1.0, 2.0, 3.0, 4.0, 5.0])
        self.assertAlmostEqual(sol.theta[0], 3.0)
        self.assertAlmostEqual(sol.residual_norm, np.sqrt(10.0))

    def test_rank_deficient(self):
        """Test repeated columns give the minimum-norm solution"""
        sol = solve_least_squares(np.ones((3, 2)), [2.0, 2.0, 2.0])
        np.testing.assert_allclose(sol.theta, [1.0, 1.0], atol=1e-12)
        self.assertEqual((sol.rank, sol.method), (1, 'gelsy'))

    def test_iterative_fallback(self):
        """Test lsqr above the direct size limit"""
        H = np.vstack([np.eye(2), np.ones((3, 2))])
        S = H @ np.array([0.5, -1.5])
        sol = solve_least_squares(H, S, LeastSquaresConfig(direct_limit=2))
        self.assertEqual(sol.method, 'lsqr')
        np.testing.assert_allclose(sol.theta, [0.5, -1.5], atol=1e-10)

    def test_empty_and_mismatched(self):
        """Test zero columns and length mismatches"""
        sol = solve_least_squares(np.zeros((2, 0)), [3.0, 4.0])
        self.assertEqual(sol.theta.size, 0)
        self.assertAlmostEqual(sol.residual_norm, 5.0)
        with self.assertRaises(ShapeError):
            solve_least_squares(np.eye(2), [1.0, 2.0, 3.0])

    def test_solve_linear_needs_affine(self):
        """Test ModeError for a nonlinear system"""
        system = CallableSystem(lambda t: t ** 2, lambda t: np.diag(2 * t), 2)
        with self.assertRaises(ModeError):
            solve_linear(system)


class TestGaussNewton(unittest.TestCase):
    """Test the damped Gauss-Newton iteration"""

    def test_scalar_root(self):
        """Test θ^2 - 4 = 0 from θ = 3"""
        system = CallableSystem(lambda t: np.array([t[0] ** 2 - 4.0]), lambda t: np.array([[2.0 * t[0]]]), 1)
        theta, diag = solve_gauss_newton(system, [3.0])
        self.assertAlmostEqual(theta[0], 2.0, places=12)
        self.assertTrue(diag.converged)
        self.assertEqual(len(diag.residual_norms), diag.iterations + 1)
        self.assertTrue(np.all(np.diff(diag.residual_norms) <= 0))

    def test_affine_in_one_step(self):
        """Test a consistent linear system converges after a single step"""
        A = np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 7.0]])
        b = A @ np.array([1.0, -1.0])
        system = CallableSystem(lambda t: A @ t - b, lambda t: A, 2, affine=True)
        theta, diag = solve_gauss_newton(system)
        np.testing.assert_allclose(theta, [1.0, -1.0], atol=1e-12)
        self.assertEqual(diag.iterations, 1)
        self.assertEqual(diag.reason, 'residual')

    def test_divergence(self):
        """Test ConvergenceError when the residual keeps growing"""
        system = CallableSystem(lambda t: t.copy(), lambda t: -np.eye(1), 1)
        with self.assertRaises(ConvergenceError) as ctx:
            solve_gauss_newton(system, [1.0])
        self.assertEqual(ctx.exception.diagnostics.reason, 'diverged')
        self.assertEqual(ctx.exception.diagnostics.to_dict()['iterations'], 5)

    def test_iteration_limit(self):
        """Test the max_iter stop is reported"""
        system = CallableSystem(lambda t: np.array([t[0] ** 2 - 4.0]), lambda t: np.array([[2.0 * t[0]]]), 1)
        _, diag = solve_gauss_newton(system, [3.0], GaussNewtonConfig(max_iter=1))
        self.assertFalse(diag.converged)
        self.assertEqual(diag.reason, 'max_iter')

    def test_start_length(self):
        """Test ShapeError for a wrong-length starting point"""
        system = CallableSystem(lambda t: t, lambda t: np.eye(2), 2)
        with self.assertRaises(ShapeError):
            solve_gauss_newton(system, [1.0])
