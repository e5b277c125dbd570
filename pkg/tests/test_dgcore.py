"""
Tests for the dgcore module.

This module contains unit tests for presentations, compilation to finite
dg categories, coproducts, strict functors and the presentation JSON format.
"""

import unittest
from fractions import Fraction

import pytest

from errors import CompileError, PresentationError, SchemaError
from exactla import GF
from dgcore import (
    Arrow, DgPresentation, DgFunctor, PresentationMorphism, compile, coproduct, point,
    path_category, laurent, dual_numbers, exterior, disk_cell, category_to_presentation,
    presentation_to_json, presentation_from_json, identity_path, koszul_path, random_presentation,
)


class TestCompile(unittest.TestCase):
    """Test cases for compile."""

    def test_a2_hom_dims(self):
        cat = compile(path_category(2))
        dims = cat.hom_dims()
        self.assertEqual(dims[('1', '1')], 1)
        self.assertEqual(dims[('2', '2')], 1)
        self.assertEqual(dims[('1', '2')], 1)
        self.assertEqual(dims[('2', '1')], 0)
        self.assertTrue(cat.nilpotent_radical)

    def test_a4_basis_size(self):
        cat = compile(path_category(4))
        self.assertEqual(len(cat), 10)
        rho = cat.index('rho1.rho2.rho3')
        self.assertEqual(cat.degree(rho), 0)

    def test_laurent_one_monomial_per_weight(self):
        cat = compile(laurent(1), weight_window=(-3, 3))
        self.assertEqual(len(cat), 7)
        self.assertEqual(sorted((m.weight, m.degree) for m in cat.monomials),
                         [(w, 2 * w) for w in range(-3, 4)])
        self.assertFalse(cat.nilpotent_radical)
        self.assertIsNotNone(cat.weight_periodic)
        t, s = cat.index('t'), cat.index('s')
        self.assertEqual(cat.mul(t, s), {cat.identity('o'): 1})
        self.assertEqual(cat.mul(cat.index('t.t'), cat.index('s')), {t: 1})

    def test_laurent_truncates_at_window_edge(self):
        cat = compile(laurent(1), weight_window=(-2, 2))
        tt = cat.index('t.t')
        self.assertEqual(cat.mul(tt, cat.index('t')), {})
        self.assertTrue(cat.truncated)

    def test_disk_cell(self):
        cat = compile(disk_cell(0))
        self.assertEqual(cat.hom_dims()[('1', '2')], 2)
        self.assertEqual(cat.d(cat.index('r')), {cat.index('s'): 1})

    def test_dual_numbers(self):
        cat = compile(dual_numbers(0))
        self.assertEqual(len(cat), 2)
        self.assertEqual(cat.mul(cat.index('x'), cat.index('x')), {})

    def test_koszul_path(self):
        cat = compile(koszul_path(3))
        a1, a2 = cat.index('a1'), cat.index('a2')
        self.assertEqual(len(cat), 5)
        self.assertEqual(cat.mul(a1, a2), {})
        self.assertEqual((cat.degree(a1), cat.weight(a1)), (1, 1))
        self.assertTrue(cat.nilpotent_radical)
        self.assertEqual(koszul_path(2, labels=('p', 'q')).objects, ('p', 'q'))
        with self.assertRaises(PresentationError):
            koszul_path(0)
        with self.assertRaises(PresentationError):
            koszul_path(2, labels=('p',))

    def test_random_presentations_are_nilpotent(self):
        for seed in range(20):
            p = random_presentation(seed)
            self.assertLessEqual(len(p.objects), 3)
            self.assertLessEqual(len(p.arrows), 4)
            self.assertEqual(random_presentation(seed).arrows, p.arrows)
            self.assertTrue(compile(p).nilpotent_radical, p.name)

    def test_exterior_over_prime_field(self):
        cat = compile(exterior(1), field=GF(101))
        self.assertEqual(len(cat), 2)
        self.assertEqual(cat.degree(cat.index('eps')), 1)

    def test_d_squared_outside_ideal(self):
        p = DgPresentation(
            ('1', '2'),
            (Arrow('x', '1', '2', 0), Arrow('y', '1', '2', 1), Arrow('z', '1', '2', 2)),
            {'x': [(1, ('y',))], 'y': [(1, ('z',))]},
        )
        with self.assertRaises(PresentationError):
            compile(p)

    def test_differential_must_preserve_relations(self):
        p = DgPresentation(
            ('o',),
            (Arrow('x', 'o', 'o', -1), Arrow('y', 'o', 'o', 0)),
            {'x': [(1, ('y',))]},
            [[(1, ('x', 'x'))], [(1, ('x', 'y'))], [(1, ('y', 'y'))]],
        )
        with self.assertRaises(PresentationError):
            compile(p)

    def test_polynomial_without_weights_refused(self):
        p = DgPresentation(('o',), (Arrow('x', 'o', 'o', 0),))
        with self.assertRaises(CompileError):
            compile(p)

    def test_laurent_needs_weight_window(self):
        with self.assertRaises(CompileError):
            compile(laurent(1))

    def test_malformed_presentation(self):
        p = DgPresentation(('o', 'o'))
        with self.assertRaises(PresentationError):
            compile(p)
        q = DgPresentation(('o',), (Arrow('x', 'o', 'p', 0),))
        with self.assertRaises(PresentationError):
            q.validate()

    def test_recompile_printed_category(self):
        cat = compile(path_category(3))
        again = compile(category_to_presentation(cat))
        self.assertEqual(again.hom_dims(), cat.hom_dims())
        self.assertEqual(len(again._mult), len(cat._mult))
        self.assertEqual(sorted(m.degree for m in again.monomials), sorted(m.degree for m in cat.monomials))

    def test_compile_is_cached(self):
        self.assertIs(compile(path_category(2)), compile(path_category(2)))


class TestCoproduct(unittest.TestCase):
    """Test cases for coproduct."""

    def test_two_points(self):
        p = coproduct([point(), point()])
        self.assertEqual(len(p.objects), 2)
        self.assertEqual(p.arrows, ())

    def test_empty(self):
        p = coproduct([])
        self.assertEqual(p.objects, ())
        self.assertEqual(compile(p).hom_dims(), {})

    def test_a2_and_point(self):
        p = coproduct([path_category(2), point()])
        self.assertEqual(len(p.objects), 3)
        self.assertEqual(len(p.arrows), 1)
        p.validate()


class TestFunctors(unittest.TestCase):
    """Test cases for strict functors."""

    def test_identity(self):
        cat = compile(path_category(3))
        DgFunctor.identity(cat).check()

    def test_inclusion_a2_a3(self):
        a2, a3 = path_category(2), path_category(3)
        m = PresentationMorphism(a2, a3, {'1': '2', '2': '3'}, {'rho1': [(1, ('rho2',))]})
        f = DgFunctor.from_morphism(m, compile(a2), compile(a3))
        src = compile(a2)
        self.assertEqual(f.apply({src.index('rho1'): 1}), {compile(a3).index('rho2'): 1})

    def test_wrong_endpoints_rejected(self):
        a2, a3 = path_category(2), path_category(3)
        m = PresentationMorphism(a2, a3, {'1': '1', '2': '3'}, {'rho1': [(1, ('rho2',))]})
        with self.assertRaises(PresentationError):
            m.validate()

    def test_identity_path_images(self):
        pt = point('a')
        m = PresentationMorphism(pt, laurent(1), {'a': 'o'}, {})
        f = DgFunctor.from_morphism(m, compile(pt), compile(laurent(1), weight_window=(-1, 1)))
        self.assertEqual(len(f.images), 1)


class TestPresentationJson(unittest.TestCase):
    """Test cases for the presentation JSON format."""

    def test_parse_printed_laurent(self):
        doc = presentation_to_json(laurent(1))
        self.assertEqual(presentation_from_json(doc), laurent(1))
        self.assertEqual(doc['relations'][0][1], [-1, 1, list(identity_path('o'))])

    def test_unknown_key_rejected(self):
        doc = presentation_to_json(point())
        doc['colour'] = 'red'
        with pytest.raises(SchemaError):
            presentation_from_json(doc)

    def test_bad_coefficient_rejected(self):
        doc = presentation_to_json(dual_numbers())
        doc['relations'] = [[[1, 0, ['x', 'x']]]]
        with pytest.raises(SchemaError):
            presentation_from_json(doc)

    def test_schema_version(self):
        doc = presentation_to_json(point())
        doc['schema'] = 2
        with pytest.raises(SchemaError):
            presentation_from_json(doc)

    def test_fraction_coefficients(self):
        doc = presentation_to_json(disk_cell())
        doc['differential']['r'] = [[1, 3, ['s']]]
        p = presentation_from_json(doc)
        self.assertEqual(p.differential['r'][0][0], Fraction(1, 3))


if __name__ == '__main__':
    unittest.main()
