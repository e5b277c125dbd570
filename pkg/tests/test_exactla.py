"""
Tests for the exactla module.

This module contains unit tests for exact sparse linear algebra: scalars,
rank, kernels, solving, homology of bounded complexes and mapping cones.
"""

import os
import random
import unittest
from fractions import Fraction

import pytest

from errors import IntegrityError
from exactla import (
    QQ, GF, Residue, SparseMatrix, GradedComplex, ChainMap, rank, kernel_basis,
    image_basis, solve, homology_dims, homology_basis, cone, IncrementalBasis,
)


def random_integer_matrix(rng, rows, cols, density=0.5, bound=5):
    entries = {}
    for r in range(rows):
        for c in range(cols):
            if rng.random() < density:
                v = rng.randint(-bound, bound)
                if v:
                    entries[(r, c)] = v
    return entries


def random_invertible(rng, n, field):
    # unit upper triangular times unit lower triangular
    upper = {(i, i): 1 for i in range(n)}
    lower = {(i, i): 1 for i in range(n)}
    for i in range(n):
        for j in range(i + 1, n):
            upper[(i, j)] = rng.randint(-2, 2)
            lower[(j, i)] = rng.randint(-2, 2)
    return SparseMatrix(n, n, upper, field) @ SparseMatrix(n, n, lower, field)


def inverse_of(m):
    n = m.rows
    cols = []
    for j in range(n):
        x = solve(m, {j: 1})
        cols.append(x)
    return SparseMatrix.from_columns(n, cols, m.field)


class TestScalars(unittest.TestCase):
    """Test cases for scalar fields."""

    def test_residue_arithmetic(self):
        a = Residue(3, 7)
        self.assertEqual(a + 5, Residue(1, 7))
        self.assertEqual(a * a.inverse(), Residue(1, 7))
        self.assertEqual(-a, Residue(4, 7))

    def test_mixed_variants_raise(self):
        with self.assertRaises(TypeError):
            Residue(1, 7) + Fraction(1, 2)
        with self.assertRaises(TypeError):
            Residue(1, 7) + Residue(1, 11)
        with self.assertRaises(TypeError):
            SparseMatrix(1, 1, {(0, 0): Residue(1, 5)}, QQ)

    def test_prime_field_rejects_composite(self):
        with self.assertRaises(ValueError):
            GF(10)

    def test_from_pair(self):
        self.assertEqual(QQ.from_pair(2, 4), Fraction(1, 2))
        self.assertEqual(GF(7).from_pair(1, 2), Residue(4, 7))


class TestRankAndKernel(unittest.TestCase):
    """Test cases for rank, kernels and solving."""

    def test_identity_and_zero(self):
        self.assertEqual(rank(SparseMatrix.identity(3)), 3)
        self.assertEqual(rank(SparseMatrix.zero(2, 2)), 0)
        self.assertEqual(kernel_basis(SparseMatrix.identity(3)), [])
        self.assertEqual(len(kernel_basis(SparseMatrix.zero(2, 2))), 2)

    def test_k0_matrix(self):
        m = SparseMatrix.from_dense([[-1, 1, 0], [-1, 0, 1]])
        self.assertEqual(rank(m), 2)
        kernel = kernel_basis(m)
        self.assertEqual(len(kernel), 1)
        v = kernel[0]
        self.assertTrue(v[0] == v[1] == v[2] != 0)

    def test_solve(self):
        self.assertEqual(solve(SparseMatrix.identity(2), [1, 2]), {0: 1, 1: 2})
        self.assertIsNone(solve(SparseMatrix.zero(2, 2), [1, 0]))
        self.assertEqual(solve(SparseMatrix.from_dense([[2]]), [1]), {0: Fraction(1, 2)})
        with self.assertRaises(ValueError):
            solve(SparseMatrix.identity(2), [1, 2, 3])

    def test_solve_prime_field(self):
        F = GF(5)
        m = SparseMatrix.from_dense([[2, 1], [0, 3]], F)
        x = solve(m, {0: 1, 1: 1})
        self.assertEqual(m.apply(x), {0: Residue(1, 5), 1: Residue(1, 5)})

    def test_rank_nullity_random(self):
        rng = random.Random(7)
        for _ in range(30):
            rows, cols = rng.randint(1, 6), rng.randint(1, 6)
            m = SparseMatrix(rows, cols, random_integer_matrix(rng, rows, cols))
            kernel = kernel_basis(m)
            self.assertEqual(rank(m) + len(kernel), cols)
            for v in kernel:
                self.assertEqual(m.apply(v), {})

    def test_bad_prime_monotonicity(self):
        rng = random.Random(11)
        for _ in range(30):
            rows, cols = rng.randint(1, 5), rng.randint(1, 5)
            entries = random_integer_matrix(rng, rows, cols)
            q = rank(SparseMatrix(rows, cols, entries, QQ))
            p = rank(SparseMatrix(rows, cols, entries, GF(3)))
            self.assertGreaterEqual(q, p)

    def test_image_basis_spans_columns(self):
        m = SparseMatrix.from_dense([[1, 2, 3], [2, 4, 6], [0, 1, 1]])
        basis = image_basis(m)
        self.assertEqual(len(basis), rank(m))
        span = IncrementalBasis(QQ)
        for v in basis:
            span.add(v)
        for c in range(m.cols):
            self.assertTrue(span.contains(m.column(c)))

    def test_deterministic_kernel(self):
        m = SparseMatrix.from_dense([[1, 1, 0, 2], [0, 0, 1, 1]])
        self.assertEqual(kernel_basis(m), kernel_basis(m))


class TestHomology(unittest.TestCase):
    """Test cases for GradedComplex homology."""

    def setUp(self):
        """Set up test fixtures."""
        self.original_env = os.environ.copy()
        os.environ['CYKIT_THREADS'] = '1'

    def tearDown(self):
        """Tear down test fixtures."""
        os.environ.clear()
        os.environ.update(self.original_env)

    def test_point(self):
        c = GradedComplex(0, 0, {0: 1})
        self.assertEqual(dict(homology_dims(c)), {0: 1})

    def test_acyclic(self):
        c = GradedComplex(0, 1, {0: 1, 1: 1}, {0: SparseMatrix.identity(1)})
        self.assertEqual(dict(homology_dims(c)), {0: 0, 1: 0})

    def test_d_squared_integrity(self):
        one = SparseMatrix.identity(1)
        with self.assertRaises(IntegrityError):
            GradedComplex(0, 2, {0: 1, 1: 1, 2: 1}, {0: one, 1: one})

    def test_truncation_flags(self):
        c = GradedComplex(-1, 0, {-1: 1, 0: 1}, truncated_below=True)
        h = homology_dims(c)
        self.assertIn(-1, h.unreliable)
        self.assertNotIn(0, h.unreliable)

    def test_parallel_matches_serial(self):
        rng = random.Random(3)
        c = self._random_complex(rng)
        os.environ['CYKIT_THREADS'] = '4'
        self.assertEqual(dict(homology_dims(c)), dict(homology_dims(c, threads=1)))

    def _random_complex(self, rng):
        # d_k = P_{k+1} E Q_k style: compose random maps through a zero middle
        dims = {0: 3, 1: 4, 2: 3}
        a = SparseMatrix(4, 3, random_integer_matrix(rng, 4, 3))
        kernel = kernel_basis(a.transpose())
        rows = [{c: v for c, v in vec.items()} for vec in kernel]
        b = SparseMatrix(3, 4, {(i, c): v for i, row in enumerate(rows[:3]) for c, v in row.items()})
        return GradedComplex(0, 2, dims, {0: a, 1: b})

    def test_euler_and_basis_change(self):
        rng = random.Random(5)
        for _ in range(10):
            c = self._random_complex(rng)
            h = homology_dims(c)
            self.assertEqual(sum((-1) ** k * v for k, v in h.items()), c.euler_characteristic())
            p = {k: random_invertible(rng, c.dim(k), QQ) for k in range(0, 3)}
            d = {k: p[k + 1] @ c.d[k] @ inverse_of(p[k]) for k in range(0, 2)}
            conj = GradedComplex(0, 2, c.dims, d)
            self.assertEqual(dict(homology_dims(conj)), dict(h))

    def test_homology_basis(self):
        c = GradedComplex(0, 1, {0: 2, 1: 1}, {0: SparseMatrix.from_dense([[1, -1]])})
        reps = homology_basis(c, 0)
        self.assertEqual(len(reps), 1)
        self.assertEqual(homology_basis(c, 1), [])


class TestCone(unittest.TestCase):
    """Test cases for mapping cones."""

    def test_identity_cone_acyclic(self):
        c = GradedComplex(0, 1, {0: 2, 1: 1}, {0: SparseMatrix.from_dense([[1, 1]])})
        ident = ChainMap(c, c, {0: SparseMatrix.identity(2), 1: SparseMatrix.identity(1)})
        self.assertTrue(all(v == 0 for v in homology_dims(cone(ident)).values()))

    def test_zero_map_cone(self):
        c = GradedComplex(0, 0, {0: 1})
        zero = ChainMap(c, c, {})
        h = homology_dims(cone(zero))
        self.assertEqual(h[-1], 1)
        self.assertEqual(h[0], 1)

    def test_non_chain_map_rejected(self):
        a = GradedComplex(0, 1, {0: 1, 1: 1}, {0: SparseMatrix.identity(1)})
        b = GradedComplex(0, 1, {0: 1, 1: 1})
        bad = ChainMap(a, b, {1: SparseMatrix.identity(1)})
        with pytest.raises(IntegrityError):
            cone(bad)


if __name__ == '__main__':
    unittest.main()
