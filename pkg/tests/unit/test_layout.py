"""
Unit Tests for Parameter Layouts
================================

Free/fixed index maps and the affine functionals built over them.
"""

import unittest

import numpy as np

from fce.exceptions import ConfigurationError, ShapeError
from fce.layout import AffineBlock, AffineFunctional, BlockAccumulator, ThetaLayout


class TestThetaLayout(unittest.TestCase):
    """Test free and fixed entries"""

    def setUp(self):
        self.keys = [('g', 0, 0), ('g', 0, 1), ('alpha', 0), ('alpha', 1)]
        self.layout = ThetaLayout(self.keys, {('alpha', 0): 2.5})

    def test_free_indices_are_contiguous(self):
        """Test fixed keys are skipped in the index map"""
        self.assertEqual(self.layout.size, 3)
        self.assertEqual(self.layout.index(('g', 0, 1)), 1)
        self.assertEqual(self.layout.index(('alpha', 1)), 2)
        self.assertIsNone(self.layout.index(('alpha', 0)))

    def test_reproducible(self):
        """Test the same keys and fixed set give the same map"""
        again = ThetaLayout(list(self.keys), {('alpha', 0): -1.0})
        self.assertEqual(again.free_keys, self.layout.free_keys)

    def test_value_reads_fixed_and_free(self):
        """Test value() for both kinds of entry"""
        theta = np.array([1.0, 2.0, 3.0])
        self.assertEqual(self.layout.value(theta, ('alpha', 0)), 2.5)
        self.assertEqual(self.layout.value(theta, ('alpha', 1)), 3.0)
        self.assertTrue(self.layout.is_fixed(('alpha', 0)))
        self.assertIn(('alpha', 0), self.layout)

    def test_count_by_name(self):
        """Test counting free entries by leading name"""
        self.assertEqual(self.layout.count('g'), 2)
        self.assertEqual(self.layout.count('alpha'), 1)

    def test_check_length(self):
        """Test a wrong-length vector raises ShapeError"""
        with self.assertRaises(ShapeError):
            self.layout.check(np.zeros(4))

    def test_duplicate_keys(self):
        """Test duplicates are rejected"""
        with self.assertRaises(ConfigurationError):
            ThetaLayout([('g', 0, 0), ('g', 0, 0)])

    def test_unknown_fixed_key(self):
        """Test fixing a key outside the layout is rejected"""
        with self.assertRaises(ConfigurationError):
            ThetaLayout(self.keys, {('beta', 0): 1.0})


class TestAffineFunctional(unittest.TestCase):
    """Test sparse affine rows"""

    def test_evaluate_and_dense(self):
        """Test row · Θ + offset with a sparse row"""
        f = AffineFunctional.from_dense(np.array([0.0, 2.0, 0.0, -1.0]), 0.5)
        np.testing.assert_array_equal(f.indices, [1, 3])
        self.assertEqual(f.evaluate([1.0, 1.0, 1.0, 3.0]), 2.0 - 3.0 + 0.5)
        np.testing.assert_array_equal(f.dense(), [0.0, 2.0, 0.0, -1.0])
        self.assertEqual(f.coefficient(2), 0.0)
        self.assertEqual(f.support(tol=1.5), [1])

    def test_linearity(self):
        """Test F(aΘ1 + bΘ2) - offset = a(F(Θ1) - offset) + b(F(Θ2) - offset)"""
        rng = np.random.default_rng(1)
        f = AffineFunctional.from_dense(rng.standard_normal(6), 1.25)
        t1, t2 = rng.standard_normal((2, 6))
        a, b = 0.3, -1.7
        lhs = f.evaluate(a * t1 + b * t2) - f.offset
        rhs = a * (f.evaluate(t1) - f.offset) + b * (f.evaluate(t2) - f.offset)
        self.assertAlmostEqual(lhs, rhs, places=12)

    def test_length_mismatch(self):
        """Test ShapeError for a wrong-length Θ"""
        with self.assertRaises(ShapeError):
            AffineFunctional.from_dense(np.ones(3), 0.0).evaluate(np.ones(2))


class TestAffineBlock(unittest.TestCase):
    """Test stacked functionals"""

    def test_scaled_and_difference(self):
        """Test row weights and block differences"""
        block = AffineBlock(np.array([[1.0, 2.0], [3.0, 4.0]]), np.array([1.0, -1.0]))
        other = AffineBlock(np.ones((2, 2)), np.zeros(2))
        theta = np.array([1.0, 1.0])
        np.testing.assert_allclose(block.scaled([2.0, 0.5]).evaluate(theta), [8.0, 3.0])
        np.testing.assert_allclose((block - other).evaluate(theta), [2.0, 4.0])
        self.assertEqual(block.functional(1).evaluate(theta), 6.0)

    def test_accumulator_folds_fixed_entries(self):
        """Test fixed keys move into the offset and free keys into the matrix"""
        layout = ThetaLayout([('a',), ('b',), ('c',)], {('b',): 3.0})
        acc = BlockAccumulator(2)
        acc.add([('a',), ('b',)], np.array([[1.0, 2.0], [0.0, 1.0]]))
        acc.add([('a',), ('c',)], np.array([[1.0, 0.0], [0.0, 5.0]]))
        acc.add_offset(0.25)
        block = acc.to_block(layout)
        np.testing.assert_allclose(block.matrix, [[2.0, 0.0], [0.0, 5.0]])
        np.testing.assert_allclose(block.offset, [6.25, 3.25])

    def test_accumulator_unknown_key(self):
        """Test a key missing from the layout is rejected"""
        acc = BlockAccumulator(1)
        acc.add([('z',)], np.ones((1, 1)))
        with self.assertRaises(ConfigurationError):
            acc.to_block(ThetaLayout([('a',)]))
