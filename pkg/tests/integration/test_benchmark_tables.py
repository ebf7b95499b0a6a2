"""
Integration Tests for the Benchmark Catalog
===========================================

Error levels and convergence rates of the registered cases. A run passes
when its error is within a factor of five of the reference value or
below it.
"""

import math

import pytest

from fce.bench.runner import run_case, sweep
from fce.config import RunConfig

pytestmark = pytest.mark.integration

FACTOR = 5.0


def assert_close_or_better(value, reference):
    assert math.isfinite(value)
    assert value <= FACTOR * reference, f"{value:.3e} exceeds {FACTOR} x {reference:.3e}"


class TestHelmholtz1D:
    """Test u'' - u = f on four elements"""

    @pytest.mark.parametrize('fce', ['c1', 'c0', 'nc'])
    @pytest.mark.parametrize('order,reference', [(5, 6.63e-7), (6, 1.59e-8)])
    def test_gll_table(self, fce, order, reference):
        """Test l2 errors for every field kind"""
        record = run_case('helmholtz1d', RunConfig(elements='4', order=order, fce=fce))
        assert_close_or_better(record.l2, reference)

    def test_low_order(self):
        """Test the C1 error at p=3"""
        record = run_case('helmholtz1d', RunConfig(order=3))
        assert_close_or_better(record.l2, 9.01e-4)

    def test_uniform_collocation(self):
        """Test uniform collocation points at p=6"""
        record = run_case('helmholtz1d', RunConfig(order=6, colloc='uniform'))
        assert_close_or_better(record.l2, 5.01e-7)

    def test_variable_coefficient(self):
        """Test the variable-coefficient variant with C0"""
        record = run_case('vc-helmholtz1d', RunConfig(order=6, fce='c0'))
        assert_close_or_better(record.l2, 1.60e-8)

    @pytest.mark.parametrize('order', [2, 3, 4])
    def test_h_rate(self, order):
        """Test the fitted h-rate is p+1"""
        report = sweep('helmholtz1d', 'h', [2, 4, 8, 16, 32], RunConfig(order=order))
        assert report.failures == 0
        assert report.rate == pytest.approx(order + 1, abs=0.3)

    def test_p_decay(self):
        """Test errors drop between consecutive even orders until the floor"""
        report = sweep('helmholtz1d', 'p', [4, 6, 8, 10])
        errors = [r.l2 for r in report.records]
        for coarse, fine in zip(errors, errors[1:]):
            if coarse > 1e-12:
                assert fine < coarse


class TestInitialValue1D:
    """Test u' + u = f with one initial condition"""

    def test_order5(self):
        """Test both errors at p=5, q=p+2"""
        record = run_case('ivp1d', RunConfig(order=5))
        assert record.q == 7
        assert_close_or_better(record.linf, 1.08e-7)
        assert_close_or_better(record.l2, 2.21e-7)

    def test_order4(self):
        """Test both errors at p=4"""
        record = run_case('ivp1d', RunConfig(order=4))
        assert_close_or_better(record.linf, 3.36e-6)
        assert_close_or_better(record.l2, 6.74e-6)

    def test_q_sweep(self):
        """Test more collocation points at fixed order"""
        report = sweep('ivp1d', 'q', [6, 7, 8], RunConfig(order=5))
        assert report.failures == 0
        assert all(r.p == 5 for r in report.records)


class TestNonlinearHelmholtz:
    """Test u'' - u + sin(u) = f solved by Gauss-Newton"""

    @pytest.mark.parametrize('elements', ['2', '4'])
    def test_order10(self, elements):
        """Test the error reaches 1e-8 by p=10"""
        record = run_case('nl-helmholtz1d', RunConfig(elements=elements, order=10))
        assert record.linf <= 1e-8
        assert record.diagnostics.converged

    def test_p_decay(self):
        """Test errors fall with the order"""
        report = sweep('nl-helmholtz1d', 'p', [4, 6, 8])
        errors = [r.linf for r in report.records]
        assert errors[0] > errors[1] > errors[2]


class TestHelmholtz2D:
    """Test u_xx + u_yy - u = f with Dirichlet data"""

    @pytest.mark.parametrize('fce,reference', [('c1', 4.05e-11), ('c0', 1.18e-10), ('nc', 7.30e-10)])
    def test_order11(self, fce, reference):
        """Test linf errors at p=11 on two elements"""
        record = run_case('helmholtz2d', RunConfig(elements='2x1', order=11, fce=fce))
        assert_close_or_better(record.linf, reference)

    @pytest.mark.parametrize('fce,reference', [('c1', 2.30e-4), ('c0', 6.24e-4), ('nc', 1.84e-3)])
    def test_order5(self, fce, reference):
        """Test linf errors at p=5 on two elements"""
        record = run_case('helmholtz2d', RunConfig(elements='2x1', order=5, fce=fce))
        assert_close_or_better(record.linf, reference)

    @pytest.mark.parametrize('order', [5, 7, 9])
    def test_kind_ordering(self, order):
        """Test more continuity never loses accuracy"""
        errors = [run_case('helmholtz2d', RunConfig(elements='2x1', order=order, fce=f)).linf
                  for f in ('c1', 'c0', 'nc')]
        assert errors[0] <= errors[1] <= errors[2]

    @pytest.mark.slow
    def test_fine_mesh(self):
        """Test C0 on an 8x8 mesh"""
        record = run_case('helmholtz2d', RunConfig(elements='8x8', order=6, fce='c0'))
        assert_close_or_better(record.linf, 1.02e-9)


class TestAdvection2D:
    """Test the space-time advection case"""

    def test_medium_mesh(self):
        """Test C0 on a 4x4 mesh"""
        record = run_case('advection2d', RunConfig(elements='4x4', order=6, fce='c0'))
        assert_close_or_better(record.linf, 3.90e-8)

    def test_gll_beats_uniform(self):
        """Test GLL collocation is more accurate than uniform points"""
        gll = run_case('advection2d', RunConfig(order=6))
        uniform = run_case('advection2d', RunConfig(order=6, colloc='uniform'))
        assert gll.linf < uniform.linf

    @pytest.mark.slow
    @pytest.mark.parametrize('fce,reference', [('c0', 5.35e-10), ('nc', 9.05e-10)])
    def test_fine_mesh(self, fce, reference):
        """Test C0 and NC on an 8x8 mesh"""
        record = run_case('advection2d', RunConfig(elements='8x8', order=6, fce=fce))
        assert_close_or_better(record.linf, reference)


class TestSinusoidBases:
    """Test cases built on sinusoid local bases"""

    def test_poisson_c1(self):
        """Test C1 reaches near machine precision"""
        record = run_case('sin-poisson1d', RunConfig(fce='c1'))
        assert record.linf <= 5e-12

    @pytest.mark.parametrize('fce,reference', [('c0', 5.96e-10), ('nc', 6.46e-7)])
    def test_poisson_kinds(self, fce, reference):
        """Test C0 and scaled NC at p=11"""
        record = run_case('sin-poisson1d', RunConfig(fce=fce))
        assert_close_or_better(record.linf, reference)

    def test_poisson_h_rate(self):
        """Test third-order h-convergence"""
        report = sweep('sin-poisson1d', 'h', [5, 10, 20, 40], RunConfig(order=6))
        assert report.rate == pytest.approx(3.0, abs=0.4)

    def test_ivp_c0(self):
        """Test C0 at p=11 on five elements"""
        record = run_case('sin-ivp1d', RunConfig(fce='c0'))
        assert_close_or_better(record.linf, 2.56e-11)

    def test_ivp_h_rate(self):
        """Test second-order h-convergence of C0"""
        report = sweep('sin-ivp1d', 'h', [5, 10, 20, 40], RunConfig(order=6, fce='c0'))
        assert report.rate == pytest.approx(2.0, abs=0.4)


class TestRelativeConstraints:
    """Test linear, nonlinear and edge relative constraints"""

    def test_linear_order10(self):
        """Test exponential decay down to 1e-10"""
        record = run_case('relbc1d-linear', RunConfig(elements='2', order=10))
        assert record.linf <= 1e-10

    @pytest.mark.parametrize('order', [4, 6, 8, 10])
    def test_linear_constraint_residual(self, order):
        """Test exact constraints hold at every order"""
        record = run_case('relbc1d-linear', RunConfig(order=order))
        assert record.constraint_residual <= 1e-11

    def test_nonlinear(self):
        """Test Gauss-Newton from zero converges to 1e-9"""
        record = run_case('relbc1d-nonlinear', RunConfig(order=10))
        assert record.linf <= 1e-9
        assert record.constraint_residual <= 1e-11

    @pytest.mark.parametrize('order', [7, 9])
    def test_edge_exact_beats_approx(self, order):
        """Test exact edge links are an order of magnitude more accurate"""
        exact = run_case('relbc2d', RunConfig(order=order, relative_mode='exact'))
        approx = run_case('relbc2d', RunConfig(order=order, relative_mode='approx'))
        assert exact.constraint_residual <= 1e-11
        assert 10.0 * exact.linf <= approx.linf


class TestMixedContinuity:
    """Test the space-time heat case with a mixed field"""

    def test_heat(self):
        """Test the default mixed field is accurate at p=8"""
        record = run_case('heat2d')
        assert record.fce_kind == 'MixedC1x'
        assert record.linf <= 1e-6
