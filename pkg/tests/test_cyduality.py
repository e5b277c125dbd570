"""
Tests for the cyduality module.

Covers quasi-isomorphism certificates, left checks through Φ, right checks
through Ψ, perfect modules and the induced right structure.
"""

import unittest

import pytest

from bimodules import (
    FreeMap, arrow_resolution, bar_resolution, dual_key, dual_map, hom_into_enveloping, koszul_resolution,
    small_resolution_An,
)
from dgcore import compile, coproduct, dual_numbers, exterior, laurent, path_category, point
from errors import IntegrityError, RefusalError
from exactla import homology_dims
from hochschild import HochschildClass, NegativeCyclicClass, lift_to_negative_cyclic
from cyduality import (
    PerfectModule, check_left_cy, check_right_cy, functional_from_names, hom_complex, induce_right_cy, inverse_dualizing,
    is_quasi_iso, phi, psi, resolution_classes, transport_class,
)


def nonzero(h):
    return {k: v for k, v in h.items() if v}


def identity_map(R):
    return FreeMap(R, R, {g.key: R.generator_elem(g.key) for g in R.generators})


def point_class(C):
    return HochschildClass(0, {(C.identity('pt'), ('pt', ())): C.field.one}, True)


def laurent_setup():
    C = compile(laurent(0), weight_window=(-3, 3))
    R = arrow_resolution(C, ['t'])
    z = resolution_classes(R, 1, weight=0)[0]
    return C, R, NegativeCyclicClass(1, [z.chain], closed=True)


class TestCertificates(unittest.TestCase):
    """Test cases for is_quasi_iso."""

    def test_identity_and_its_dual_pass(self):
        R = small_resolution_An(2)
        dual = hom_into_enveloping(R)
        self.assertTrue(is_quasi_iso(identity_map(R)).passed)
        self.assertTrue(is_quasi_iso(dual_map(identity_map(R), dual, dual)).passed)

    def test_json_verdict(self):
        cert = is_quasi_iso(identity_map(small_resolution_An(1)))
        doc = cert.to_json()
        self.assertEqual(doc['verdict'], 'pass')
        self.assertEqual(doc['cone_homology'], {})


class TestLeftCalabiYau(unittest.TestCase):
    """Test cases for phi and check_left_cy."""

    def test_inverse_dualizing_of_a_small_resolution(self):
        R = small_resolution_An(2)
        dual = inverse_dualizing(R.category, R)
        self.assertIs(dual.resolution, R)
        self.assertEqual(sorted(g.key for g in dual.generators),
                         sorted(dual_key(g.key) for g in R.generators))

    def test_phi_of_point_is_identity(self):
        C = compile(point())
        R = bar_resolution(C)
        F = phi(C, point_class(C), R)
        self.assertEqual(F.images, {dual_key(('pt', ())): {C.identity('pt'): 1}})

    def test_point_is_left_cy_of_dimension_zero(self):
        C = compile(point())
        lifted = lift_to_negative_cyclic(C, point_class(C), 0)
        report = check_left_cy(C, lifted, 0)
        self.assertIs(report.verdict, True)
        self.assertEqual(report.to_json()['verdict'], 'pass')

    def test_path_category_fails_on_both_resolutions(self):
        C = compile(path_category(2))
        e1, e2 = C.identity('1'), C.identity('2')
        bar_class = HochschildClass(0, {(e1, ('1', ())): 1, (e2, ('2', ())): 1}, True)
        small = small_resolution_An(2)
        small_class = HochschildClass(0, {(small.category.identity('1'), ('obj', '1')): 1,
                                          (small.category.identity('2'), ('obj', '2')): 1}, True)
        self.assertIs(check_left_cy(C, bar_class, 0).verdict, False)
        self.assertIs(check_left_cy(small.category, small_class, 0, small).verdict, False)

    def test_hochschild_class_alone_is_inconclusive(self):
        C = compile(point())
        report = check_left_cy(C, point_class(C), 0)
        self.assertFalse(report.lift_complete)
        self.assertIsNone(report.verdict)

    def test_laurent_is_left_cy_of_dimension_one(self):
        C, R, lifted = laurent_setup()
        report = check_left_cy(C, lifted, 1, R)
        self.assertIs(report.verdict, True)
        self.assertTrue(report.certificates['phi'].notes)

    def test_odd_dual_numbers_fail_on_bar_and_koszul(self):
        C = compile(dual_numbers(1, weight=1))
        z = NegativeCyclicClass(0, [{(C.identity('o'), ('o', ())): 1}], closed=True)
        for R in (bar_resolution(C, weight_bound=4), koszul_resolution(C, weight_bound=4)):
            report = check_left_cy(C, z, 0, R)
            self.assertIs(report.verdict, False)
            self.assertTrue(report.certificates['phi'].cone_homology)

    def test_laurent_verdict_agrees_on_windowed_bar(self):
        C = compile(laurent(1), weight_window=(-3, 3))
        t, s = C.index('t'), C.index('s')
        arrow = arrow_resolution(C, ['t'])
        bar = bar_resolution(C, max_letters=2)
        on_arrow = check_left_cy(C, NegativeCyclicClass(1, [{(s, ('arr', 't')): 1}], closed=True), 1, arrow)
        on_bar = check_left_cy(C, NegativeCyclicClass(1, [{(s, ('o', (t,))): 1}], closed=True), 1, bar)
        self.assertIs(on_arrow.verdict, True)
        self.assertIs(on_bar.verdict, on_arrow.verdict)
        self.assertTrue(any('moved from' in note for note in on_bar.notes))

    def test_dimension_mismatch(self):
        C = compile(point())
        with self.assertRaises(RefusalError):
            check_left_cy(C, point_class(C), 2)

    def test_transport_between_resolutions(self):
        small = small_resolution_An(3)
        C = small.category
        z = HochschildClass(0, {(C.identity('1'), ('obj', '1')): 1}, True)
        moved = transport_class(z, small, bar_resolution(C))
        self.assertEqual(moved.chain, {(C.identity('1'), ('1', ())): 1})


class TestRightCalabiYau(unittest.TestCase):
    """Test cases for psi and check_right_cy."""

    def test_exterior_algebra(self):
        C = compile(exterior(1))
        omega = functional_from_names(C, {'eps': 1})
        psi(C, omega, 1).check_bimodule()
        self.assertIs(check_right_cy(C, omega, 1).verdict, True)

    def test_point(self):
        C = compile(point())
        self.assertIs(check_right_cy(C, {C.identity('pt'): 1}, 0).verdict, True)

    def test_functional_missing_a_component(self):
        C = compile(coproduct([point('a'), point('b')]))
        report = check_right_cy(C, {C.identity(C.objects[0]): 1}, 0)
        self.assertIs(report.verdict, False)

    def test_wrong_degree_refused(self):
        C = compile(exterior(1))
        with pytest.raises(RefusalError):
            psi(C, functional_from_names(C, {'eps': 1}), 0)

    def test_path_category_fails(self):
        C = compile(path_category(2))
        omega = {C.identity('1'): 1, C.identity('2'): 1}
        self.assertIs(check_right_cy(C, omega, 0).verdict, False)


class TestPerfectModules(unittest.TestCase):
    """Test cases for twisted complexes and induced pairings."""

    def test_twisting_degree_checked(self):
        C = compile(path_category(2))
        with pytest.raises(RefusalError):
            PerfectModule(C, [('1', 0), ('2', 0)], {(0, 1): {C.index('rho1'): 1}})

    def test_cone_of_arrow_is_simple(self):
        C = compile(path_category(2))
        L = PerfectModule(C, [('1', 0), ('2', 1)], {(0, 1): {C.index('rho1'): 1}})
        self.assertEqual(nonzero(homology_dims(L.evaluate('1'))), {0: 1})
        self.assertEqual(nonzero(homology_dims(L.evaluate('2'))), {})
        self.assertEqual(L.supertrace(), {'1': 1, '2': -1})
        self.assertEqual(nonzero(homology_dims(hom_complex(L, L))), {0: 1})

    def test_cone_of_unit_is_contractible(self):
        C = compile(laurent(0), weight_window=(-3, 3))
        P = PerfectModule(C, [('o', 0), ('o', 1)], {(0, 1): {C.index('t'): 1}})
        self.assertEqual(P.weights, [0, 1])
        self.assertEqual(nonzero(homology_dims(hom_complex(P, P, 0))), {})

    def test_induced_pairing_on_point(self):
        C = compile(point())
        lifted = lift_to_negative_cyclic(C, point_class(C), 0)
        report = induce_right_cy(C, lifted, 0, [PerfectModule(C, [('pt', 0)])])
        self.assertIs(report.verdict, True)
        self.assertEqual(len(report.pairings), 1)
        self.assertTrue(report.pairings[0].perfect)

    def test_zero_module_is_vacuous(self):
        C = compile(point())
        lifted = lift_to_negative_cyclic(C, point_class(C), 0)
        report = induce_right_cy(C, lifted, 0, [PerfectModule(C, [])])
        self.assertIs(report.verdict, True)
        self.assertEqual(report.pairings, [])

    def test_contractible_module_over_laurent(self):
        C, R, lifted = laurent_setup()
        P = PerfectModule(C, [('o', 0), ('o', 1)], {(0, 1): {C.index('t'): 1}})
        report = induce_right_cy(C, lifted, 1, [P], R)
        self.assertIs(report.verdict, True)
        self.assertIn("all Hom complexes are acyclic", report.notes)


if __name__ == '__main__':
    unittest.main()
