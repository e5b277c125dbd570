"""
Tests for the relcy module.

Covers functors out of points into perfect modules, the pushed diagonal
with its counit, relative left checks and the strict right-handed mirror.
"""

import json
import unittest

import pytest

from bimodules import dual_key
from dgcore import DgFunctor, compile, exterior, path_category, point
from errors import RefusalError, SchemaError
from hochschild import NegativeCyclicClass, RelativeClass, k0_character, relative_hochschild
from cyduality import PerfectModule, check_left_cy
from relcy import (
    FunctorData, RelativeFunctional, _colouring, build_counit, canonical_relative_class, check_relative_left_cy,
    check_relative_right_cy, functor_from_json, functor_to_json, hh_trace_map, pushed_diagonal,
    koszul_functor, middle_map, relative_class_from_json, relative_class_to_json, standard_functor,
)


def nonzero(h):
    return {k: v for k, v in h.items() if v}


def point_to_exterior():
    A, B = compile(point()), compile(exterior(1))
    return DgFunctor(A, B, {'pt': B.objects[0]}, {A.identity('pt'): {B.identity(B.objects[0]): 1}})


class TestFunctorData(unittest.TestCase):
    """Test cases for FunctorData and the standard functor."""

    def test_source_must_be_points(self):
        S = compile(path_category(2))
        with pytest.raises(RefusalError):
            FunctorData(S, S, {})

    def test_unknown_source_object(self):
        S = compile(path_category(2))
        with pytest.raises(RefusalError):
            FunctorData(compile(point('a')), S, {'b': PerfectModule(S, [('1', 0)])})

    def test_zero_images_dropped(self):
        S = compile(path_category(2))
        f = FunctorData(compile(point('a')), S, {'a': PerfectModule(S, [])})
        self.assertEqual(f.images, {})
        self.assertEqual(f.summands('a'), [])

    def test_standard_functor_summands(self):
        f = standard_functor(2)
        self.assertEqual(f.summands('0'), [('1', 1)])
        self.assertEqual(f.summands('1'), [('1', 0), ('2', 1)])
        self.assertEqual(f.summands('2'), [('2', 0)])

    def test_standard_functor_labels(self):
        f = standard_functor(2, labels=('a', 'b', 'c'))
        self.assertEqual(f.source_objects, ['a', 'b', 'c'])
        self.assertEqual(f.summands('b'), [('1', 0), ('2', 1)])
        with pytest.raises(RefusalError):
            standard_functor(2, labels=('a', 'b'))

    def test_koszul_functor_summands(self):
        f = koszul_functor(3)
        self.assertEqual(f.summands('0'), [('1', 1), ('2', 1), ('3', 1)])
        self.assertEqual(f.summands('2'), [('2', 0)])
        self.assertEqual(koszul_functor(1).summands('0'), standard_functor(1).summands('0'))

    def test_standard_functor_needs_positive_n(self):
        with pytest.raises(RefusalError):
            standard_functor(0)

    def test_k0_character(self):
        k0 = k0_character(standard_functor(2))
        self.assertEqual(k0.projective.to_dense(), [[-1, 1, 0], [0, -1, 1]])
        self.assertEqual(k0.simple.to_dense(), [[-1, 1, 0], [-1, 0, 1]])


class TestTraceMap(unittest.TestCase):
    """Test cases for the character map on Hochschild chains."""

    def trace_of(self, f, x):
        src, tgt, fmap = f.hh_chain_map()
        k, vec = src.to_vector({(f.source.identity(x), (x, ())): 1})
        return tgt.to_chain(k, fmap.component(k).apply(vec))

    def test_shifted_summand_enters_negated(self):
        f = standard_functor(2)
        S = f.target
        self.assertEqual(self.trace_of(f, '0'), {(S.identity('1'), ('1', ())): -1})
        self.assertEqual(self.trace_of(f.shifted(1), '0'), {(S.identity('1'), ('1', ())): 1})

    def test_cancelling_summands(self):
        S = compile(point())
        f = FunctorData(compile(point('a')), S, {'a': PerfectModule(S, [('pt', 0), ('pt', 1)])})
        self.assertEqual(self.trace_of(f, 'a'), {})

    def test_trace_map_in_degree_zero(self):
        m = hh_trace_map(standard_functor(3)).component(0)
        self.assertEqual((m.rows, m.cols), (3, 4))

    def test_relative_hochschild_of_standard_functor(self):
        rel = relative_hochschild(standard_functor(2))
        self.assertEqual(nonzero(rel.dims()), {1: 1})


class TestCounit(unittest.TestCase):
    """Test cases for the pushed diagonal and the counit."""

    def test_generator_count(self):
        F = pushed_diagonal(standard_functor(2))
        self.assertEqual(len(F.generators), 6)

    def test_single_projective_pushes_to_one_generator(self):
        S = compile(path_category(2))
        f = FunctorData(compile(point('a')), S, {'a': PerfectModule(S, [('1', 0)])})
        cd = build_counit(f)
        self.assertEqual(len(cd.pushed.generators), 1)
        self.assertEqual(cd.counit.images, {('a', 0, 0): {S.identity('1'): S.field.one}})

    def test_colouring_alternates_along_twisting(self):
        f = koszul_functor(3)
        self.assertEqual(_colouring(f.images['0']), [1, 0, 1])
        self.assertEqual(_colouring(f.images['2']), [0])
        self.assertEqual(_colouring(standard_functor(2).images['1']), [0, 1])

    def test_middle_map_signs_follow_shifts(self):
        cd = build_counit(standard_functor(1))
        S = cd.functor.target
        e = S.identity('1')
        xi = middle_map(cd, {'0': 1, '1': 1})
        self.assertEqual(xi.images, {dual_key(('0', 0, 0)): {(e, ('0', 0, 0), e): -1},
                                     dual_key(('1', 0, 0)): {(e, ('1', 0, 0), e): 1}})

    def test_unbounded_target_refused(self):
        S = compile(exterior(1))
        f = FunctorData(compile(point('a')), S, {'a': PerfectModule(S, [(S.objects[0], 0)])})
        with pytest.raises(RefusalError):
            build_counit(f)


class TestRelativeLeft(unittest.TestCase):
    """Test cases for check_relative_left_cy."""

    def test_standard_functor_passes(self):
        for n in (1, 2, 3):
            f = standard_functor(n)
            report = check_relative_left_cy(f, canonical_relative_class(f))
            self.assertIs(report.verdict, True, f"A{n}")
            self.assertEqual(set(report.certificates), {'xi_prime', 'xi', 'xi_double_prime'})

    def test_koszul_functor_passes(self):
        for n in (1, 2):
            f = koszul_functor(n)
            report = check_relative_left_cy(f, canonical_relative_class(f))
            self.assertIs(report.verdict, True, f"E{n}")

    def test_zero_class_fails(self):
        f = standard_functor(2)
        report = check_relative_left_cy(f, canonical_relative_class(f, scale=0))
        self.assertIs(report.verdict, False)
        self.assertFalse(report.certificates['xi'].passed)

    def test_degree_mismatch(self):
        f = standard_functor(1)
        with pytest.raises(RefusalError):
            check_relative_left_cy(f, canonical_relative_class(f), 2)

    def test_bounding_chain_must_bound(self):
        f = standard_functor(1)
        S = f.target
        rel = canonical_relative_class(f)
        broken = RelativeClass(1, rel.source, [{(S.identity('1'), ('1', ())): 1}])
        with pytest.raises(RefusalError):
            check_relative_left_cy(f, broken)

    def test_zero_functor_reduces_to_absolute_check(self):
        S = compile(point())
        f = FunctorData(compile(point('a')), S, {})
        beta = {(S.identity('pt'), ('pt', ())): 1}
        rel = RelativeClass(0, NegativeCyclicClass(-1, [{}], closed=True), [beta])
        report = check_relative_left_cy(f, rel, 0)
        absolute = check_left_cy(S, NegativeCyclicClass(0, [beta], closed=True), 0)
        self.assertIs(report.verdict, True)
        self.assertIs(absolute.verdict, True)
        self.assertIn("the induced bimodule vanishes; the check reduces to the absolute one", report.notes)


class TestRelativeRight(unittest.TestCase):
    """Test cases for check_relative_right_cy."""

    def test_point_into_exterior_algebra(self):
        f = point_to_exterior()
        B = f.target
        cocycle = RelativeFunctional({B.index('eps'): 1})
        self.assertIs(check_relative_right_cy(f, cocycle, 2).verdict, True)

    def test_zero_functional_fails(self):
        f = point_to_exterior()
        B = f.target
        cocycle = RelativeFunctional({B.index('eps'): 1}).scaled(0)
        self.assertIs(check_relative_right_cy(f, cocycle, 2).verdict, False)

    def test_unbounded_composite_refused(self):
        A = compile(point())
        f = DgFunctor.identity(A)
        with pytest.raises(RefusalError):
            check_relative_right_cy(f, RelativeFunctional({A.identity('pt'): 1}), 1)


class TestJson(unittest.TestCase):
    """Test cases for functor and relative class documents."""

    def test_unknown_key_rejected(self):
        doc = functor_to_json(standard_functor(1))
        doc['extra'] = True
        with pytest.raises(SchemaError):
            functor_from_json(doc)

    def test_unknown_monomial_rejected(self):
        doc = functor_to_json(standard_functor(2))
        doc['images'][1]['differential'][0]['element'][0][0] = 'nope'
        with pytest.raises(SchemaError):
            functor_from_json(doc)

    def test_reload_keeps_summands_and_verdict(self):
        f = standard_functor(2)
        g = functor_from_json(json.loads(json.dumps(functor_to_json(f))))
        for x in f.source_objects:
            self.assertEqual(g.summands(x), f.summands(x))
        rel = relative_class_from_json(g, json.loads(json.dumps(relative_class_to_json(f, canonical_relative_class(f)))))
        self.assertIs(check_relative_left_cy(g, rel).verdict, True)


if __name__ == '__main__':
    unittest.main()
