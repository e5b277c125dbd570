"""
Tests for the hochschild module.

This module contains unit tests for mixed complexes, Hochschild homology,
relative complexes, negative cyclic lifting and truncated HC⁻.
"""

import unittest
from types import SimpleNamespace

import pytest

from errors import IntegrityError, ObstructionError, RefusalError, SchemaError
from exactla import GF, QQ, GradedComplex, SparseMatrix
from dgcore import (
    DgFunctor, PresentationMorphism, compile, coproduct, disk_cell, dual_numbers, laurent, path_category, point,
    random_presentation,
)
from hochschild import (
    HochschildClass, MixedComplex, NegativeCyclicClass, class_from_json, class_to_json, commutes_with_connes,
    functor_chain_map,
    hc_minus_dims, hh, hh_dims, hh_per_weight, is_negative_cyclic_cycle, k0_character, lift_to_negative_cyclic,
    mixed_complex, relative_hochschild, same_class,
)


def nonzero(h):
    return {k: v for k, v in h.items() if v}


def inclusion_a2_a3():
    a2, a3 = path_category(2), path_category(3)
    m = PresentationMorphism(a2, a3, {'1': '2', '2': '3'}, {'rho1': [(1, ('rho2',))]})
    return DgFunctor.from_morphism(m, compile(a2), compile(a3))


class TestMixedComplex(unittest.TestCase):
    """Test cases for the normalized Hochschild complex with B."""

    def test_point(self):
        mc = mixed_complex(compile(point()))
        self.assertEqual(nonzero(mc.underlying.dims), {0: 1})
        self.assertFalse(mc.truncated)

    def test_identities_hold_for_path_categories(self):
        for n in (2, 3, 4):
            mc = mixed_complex(compile(path_category(n)))
            mc.check()

    def test_dual_numbers_window(self):
        mc = mixed_complex(compile(dual_numbers(0)), window=(-4, 0))
        self.assertTrue(mc.truncated)
        self.assertEqual(mc.verified_from, -2)
        C = mc.category
        x, e = C.index('x'), C.identity('o')
        # B(x[x|x]) = 3·1[x|x|x]
        k, vec = mc.to_vector({(x, ('o', (x, x))): 1})
        out = mc.to_chain(k - 1, mc.apply_B(k, vec))
        self.assertEqual(out, {(e, ('o', (x, x, x))): 3})

    def test_broken_connes_operator_rejected(self):
        c = GradedComplex(0, 1, {0: 1, 1: 1}, {0: SparseMatrix.identity(1)})
        with self.assertRaises(IntegrityError):
            MixedComplex(c, {1: SparseMatrix.identity(1)})


@pytest.mark.parametrize('field', [QQ, GF(101)], ids=['QQ', 'GF101'])
@pytest.mark.parametrize('seed', range(50))
def test_random_mixed_identities(seed, field):
    mc = mixed_complex(compile(random_presentation(seed, max_objects=3, max_arrows=4), field=field))
    assert not mc.truncated
    for k in range(mc.lo, mc.hi + 1):
        assert (mc.b(k + 1) @ mc.b(k)).is_zero()
        assert (mc.B(k - 1) @ mc.B(k)).is_zero()
        assert (mc.b(k - 1) @ mc.B(k) + mc.B(k + 1) @ mc.b(k)).is_zero()


class TestHochschildHomology(unittest.TestCase):
    """Test cases for hh and hh_per_weight."""

    def test_path_categories(self):
        self.assertEqual(hh_dims(compile(point())), {0: 1})
        for n in (2, 3):
            self.assertEqual(hh_dims(compile(path_category(n))), {0: n})

    def test_representatives_are_vertices(self):
        C = compile(path_category(2))
        reps = hh(C)[0].representatives
        self.assertEqual(len(reps), 2)
        self.assertTrue(all(r.is_cycle and r.degree == 0 for r in reps))

    def test_dual_numbers(self):
        result = hh(compile(dual_numbers(0)), window=(-4, 0))
        self.assertEqual(result[0].dimension, 2)
        for n in (1, 2, 3):
            self.assertEqual(result[n].dimension, 1)
            self.assertFalse(result[n].unreliable)
        self.assertTrue(result[4].unreliable)

    def test_disk_cell_is_two_points(self):
        self.assertEqual(hh_dims(compile(disk_cell(0))), {0: 2})

    def test_laurent_per_weight(self):
        C = compile(laurent(1), weight_window=(-3, 3))
        per_weight = hh_per_weight(C)
        self.assertEqual(sorted(per_weight), [-2, -1, 0, 1, 2])
        for w, h in per_weight.items():
            self.assertEqual(nonzero(h), {-2 * w: 1, 1 - 2 * w: 1})

    def test_same_class(self):
        C = compile(dual_numbers(0))
        mc = mixed_complex(C, window=(-4, 0))
        x, e = C.index('x'), C.identity('o')
        # b(1[x|x]) = 2·x[x]
        self.assertTrue(same_class(mc, {(x, ('o', (x,))): 2}, {}))
        self.assertFalse(same_class(mc, {(e, ('o', (x,))): 1}, {}))


class TestRelative(unittest.TestCase):
    """Test cases for functoriality and relative Hochschild complexes."""

    def test_identity_functor_is_acyclic(self):
        C = compile(path_category(2))
        rel = relative_hochschild(DgFunctor.identity(C))
        self.assertEqual(nonzero(rel.dims()), {})
        self.assertEqual(rel.les_defects(), [])

    def test_zero_functor(self):
        C = compile(path_category(2))
        empty = compile(coproduct([]))
        rel = relative_hochschild(DgFunctor(empty, C, {}, {}))
        self.assertEqual(nonzero(rel.dims()), {0: 2})

    def test_inclusion(self):
        f = inclusion_a2_a3()
        rel = relative_hochschild(f)
        self.assertEqual(nonzero(rel.dims()), {0: 1})
        self.assertEqual(rel.les_defects(), [])
        self.assertTrue(commutes_with_connes(rel.chain_map, rel.source, rel.target))

    def test_functor_chain_map_on_vertices(self):
        f = inclusion_a2_a3()
        src, tgt = mixed_complex(f.source), mixed_complex(f.target)
        fmap = functor_chain_map(f, src, tgt)
        A, B = f.source, f.target
        k, vec = src.to_vector({(A.identity('1'), ('1', ())): 1})
        self.assertEqual(tgt.to_chain(0, fmap.component(0).apply(vec)), {(B.identity('2'), ('2', ())): 1})


class TestNegativeCyclic(unittest.TestCase):
    """Test cases for lifting and HC⁻ dimensions."""

    def test_vertex_classes_lift_trivially(self):
        C = compile(path_category(2))
        z = hh(C)[0].representatives[0]
        lifted = lift_to_negative_cyclic(C, z, vanishing_bound=0)
        self.assertTrue(lifted.closed)
        self.assertEqual(len(lifted.coefficients), 1)
        self.assertTrue(is_negative_cyclic_cycle(mixed_complex(C), lifted))

    def test_odd_class_of_dual_numbers_lifts(self):
        C = compile(dual_numbers(0))
        x, e = C.index('x'), C.identity('o')
        lifted = lift_to_negative_cyclic(C, HochschildClass(1, {(e, ('o', (x,))): 1}), 1, window=(-4, 0))
        self.assertTrue(lifted.closed)

    def test_fake_vanishing_bound_is_obstructed(self):
        C = compile(dual_numbers(0))
        x = C.index('x')
        with self.assertRaises(ObstructionError) as cm:
            lift_to_negative_cyclic(C, HochschildClass(0, {(x, ('o', ())): 1}), 0, window=(-4, 0))
        self.assertEqual(cm.exception.order, 1)

    def test_non_cycle_refused(self):
        C = compile(dual_numbers(0))
        x, e = C.index('x'), C.identity('o')
        with pytest.raises(RefusalError):
            lift_to_negative_cyclic(C, HochschildClass(2, {(e, ('o', (x, x))): 1}), 2, window=(-4, 0))

    def test_hc_minus_point(self):
        result = hc_minus_dims(compile(point()), window=(0, 4), u_order=3)
        self.assertEqual(result.dims, {0: 1, 1: 0, 2: 1, 3: 0, 4: 1})
        self.assertEqual(result.unstable, frozenset())

    def test_hc_minus_path_category(self):
        result = hc_minus_dims(compile(path_category(3)), window=(-2, 2), u_order=2)
        self.assertEqual(result.reliable()[0], 3)

    def test_hc_minus_flags_unstable_top(self):
        result = hc_minus_dims(compile(point()), window=(0, 4), u_order=1)
        self.assertIn(4, result.unstable)


class TestCharacters(unittest.TestCase):
    """Test cases for k0_character."""

    def test_standard_a2_images(self):
        C = compile(path_category(2))
        f = SimpleNamespace(
            target=C, source_objects=['L0', 'L1', 'L2'],
            summands={'L0': [('1', 1)], 'L1': [('1', 0), ('2', 1)], 'L2': [('2', 0)]}.__getitem__,
        )
        chi = k0_character(f)
        self.assertEqual(chi.projective.to_dense(), [[-1, 1, 0], [0, -1, 1]])
        self.assertEqual(chi.simple.to_dense(), [[-1, 1, 0], [-1, 0, 1]])


class TestClassJson(unittest.TestCase):
    """Test cases for the class JSON format."""

    def test_negative_cyclic_document(self):
        C = compile(path_category(2))
        lifted = lift_to_negative_cyclic(C, hh(C)[0].representatives[0], 0)
        doc = class_to_json(C, lifted)
        self.assertEqual(doc['kind'], 'negative_cyclic')
        self.assertEqual(class_from_json(C, doc), lifted)

    def test_closed_flag_is_checked(self):
        C = compile(dual_numbers(0))
        # B(x⊗[]) = 1⊗[x] ≠ 0, so x⊗[] does not close up at order zero
        chain = {(C.index('x'), ('o', ())): C.field.one}
        doc = class_to_json(C, NegativeCyclicClass(0, [chain], None, True))
        with pytest.raises(SchemaError):
            class_from_json(C, doc)
        doc['closed'] = False
        self.assertFalse(class_from_json(C, doc).closed)

    def test_unknown_monomial(self):
        C = compile(path_category(2))
        doc = {'schema': 1, 'kind': 'hochschild', 'degree': 0,
               'chain': [[{'m': 'nope', 'x': '1', 'word': []}, [1, 1]]]}
        with pytest.raises(SchemaError):
            class_from_json(C, doc)


if __name__ == '__main__':
    unittest.main()
