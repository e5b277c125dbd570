"""
Tests for the glue module.

Covers cell pushouts of presentations, the bimodule pushout certificate,
composition of cospans and Drinfeld localization.
"""

import json
import random
import unittest

import pytest

from cyduality import PerfectModule
from dgcore import (
    Arrow, DgFunctor, DgPresentation, PresentationMorphism, compile, coproduct, path_category, point,
    random_presentation, sphere_cell,
)
from errors import RefusalError, SchemaError
from hochschild import NegativeCyclicClass, RelativeClass, relative_hochschild
from relcy import FunctorData
from glue import (
    CospanData, PushoutSquare, add_arrow, add_cell, add_object, attach, cap_cospan, compose_cospans,
    cospan_from_json, cospan_to_json, disk_cospan, glue_apex, identity_cospan, localize, pushout, pushout_square,
    reverse_cospan, verify_bimodule_pushout,
)


def nonzero(h):
    return {k: v for k, v in h.items() if v}


def glue_a2_at_end():
    """A second arrow attached at object 2 of A_2."""
    base = point('x')
    cells = [add_object('3'), add_arrow('sigma', 'x', '3')]
    leg = PresentationMorphism(base, path_category(2), {'x': '2'}, {})
    return base, cells, leg


def cell_onto_arrow():
    """r with d(r) = rho1 attached to A_2 along the sphere cell."""
    base = sphere_cell(0)
    leg = PresentationMorphism(base, path_category(2), {'1': '1', '2': '2'}, {'s': ((1, ('rho1',)),)})
    return base, [add_cell('r', 's')], leg


def composed_disks():
    return compose_cospans(disk_cospan(2, 2), reverse_cospan(disk_cospan(2, 2, scale=-1)))


def point_cospan(images, rel):
    S = compile(point())
    f = FunctorData(compile(point('a')), S, {'a': PerfectModule(S, images)} if images else {})
    return CospanData(('a',), (), f, rel)


class TestPushout(unittest.TestCase):
    """Test cases for cell attachments and pushouts of presentations."""

    def test_object_into_empty(self):
        empty = DgPresentation()
        p = pushout(empty, [add_object('x')], PresentationMorphism(empty, empty, {}, {}))
        self.assertEqual(p.objects, ('x',))

    def test_arrow_between_identified_points(self):
        base = DgPresentation(('1', '2'))
        leg = PresentationMorphism(base, point(), {'1': 'pt', '2': 'pt'}, {})
        p = pushout(base, [add_arrow('r', '1', '2', 0)], leg)
        self.assertEqual(p.objects, ('pt',))
        self.assertEqual([(a.name, a.src, a.tgt) for a in p.arrows], [('r', 'pt', 'pt')])

    def test_undefined_attaching_map_refused(self):
        base = DgPresentation(('1', '2'))
        leg = PresentationMorphism(base, point(), {'1': 'pt'}, {})
        with pytest.raises(RefusalError):
            pushout(base, [add_arrow('r', '1', '2', 0)], leg)

    def test_gluing_two_paths_at_a_point(self):
        p = pushout(*glue_a2_at_end())
        self.assertEqual(p.objects, ('1', '2', '3'))
        self.assertEqual([a.name for a in p.arrows], ['rho1', 'sigma'])
        self.assertEqual(len(compile(p).hom('1', '3')), 1)

    def test_cell_degree_checked(self):
        with pytest.raises(RefusalError):
            attach(sphere_cell(0), [add_cell('r', 's', deg=0)])

    def test_cell_transports_its_boundary(self):
        p = pushout(*cell_onto_arrow())
        self.assertEqual(p.arrow('r').deg, -1)
        self.assertEqual(p.differential['r'], ((1, ('rho1',)),))


class TestBimodulePushout(unittest.TestCase):
    """Test cases for verify_bimodule_pushout."""

    def test_identity_square(self):
        F = DgFunctor.identity(compile(path_category(2)))
        self.assertIs(verify_bimodule_pushout(PushoutSquare(F, F, F, F)).verdict, True)

    def test_cell_onto_arrow(self):
        cert = verify_bimodule_pushout(pushout_square(*cell_onto_arrow()))
        self.assertIs(cert.verdict, True)
        self.assertEqual(nonzero(cert.cone_homology), {})

    def test_gluing_two_paths(self):
        self.assertIs(verify_bimodule_pushout(pushout_square(*glue_a2_at_end())).verdict, True)

    def test_missing_object_fails(self):
        A = compile(point())
        B2 = compile(coproduct([point('p'), point('q')]))
        idA = DgFunctor.identity(A)
        to_p = DgFunctor(A, B2, {'pt': 'p'}, {A.identity('pt'): {B2.identity('p'): 1}})
        self.assertIs(verify_bimodule_pushout(PushoutSquare(idA, idA, to_p, to_p)).verdict, False)

    def test_square_must_commute(self):
        A = compile(point())
        B2 = compile(coproduct([point('p'), point('q')]))
        idA = DgFunctor.identity(A)
        to_p = DgFunctor(A, B2, {'pt': 'p'}, {A.identity('pt'): {B2.identity('p'): 1}})
        to_q = DgFunctor(A, B2, {'pt': 'q'}, {A.identity('pt'): {B2.identity('q'): 1}})
        cert = verify_bimodule_pushout(PushoutSquare(idA, idA, to_p, to_q))
        self.assertIs(cert.verdict, False)
        self.assertIn("the square does not commute", cert.notes)


class TestCospans(unittest.TestCase):
    """Test cases for disk, identity and composed cospans."""

    def test_disk_cospan_passes(self):
        c = disk_cospan(2, 2)
        self.assertEqual((c.left, c.right), (('0', '1'), ('2',)))
        self.assertIs(c.verify().verdict, True)
        self.assertIs(c.verified, True)

    def test_boundary_points_must_match_the_functor(self):
        c = disk_cospan(1, 1)
        with pytest.raises(RefusalError):
            CospanData(('0',), (), c.functor, c.relative_class)

    def test_reverse_swaps_sides(self):
        c = reverse_cospan(disk_cospan(2, 2))
        self.assertEqual((c.left, c.right), (('2',), ('0', '1')))

    def test_composing_two_disks(self):
        c = composed_disks()
        self.assertEqual(c.left, ('0', '1'))
        self.assertEqual(c.right, ('b:0', 'b:1'))
        self.assertEqual(len(c.functor.target.objects), 3)
        self.assertEqual(nonzero(relative_hochschild(c.functor).dims()), {1: 1})
        self.assertEqual(c.coefficients(), {'0': 1, '1': 1, 'b:0': -1, 'b:1': -1})
        self.assertIs(c.verify().verdict, True)

    def test_composing_with_the_identity(self):
        c1 = disk_cospan(2, 2)
        c = compose_cospans(c1, identity_cospan(['2']), verify=True)
        self.assertEqual(c.right, ("2'",))
        self.assertEqual(c.functor.target.objects, c1.functor.target.objects)
        self.assertIs(c.verified, True)

    def test_mismatched_boundary_classes_refused(self):
        for scale in (-2, 1):
            with pytest.raises(RefusalError):
                compose_cospans(disk_cospan(2, 2), reverse_cospan(disk_cospan(2, 2, scale=scale)))

    def test_shifted_ends_are_glued_up_to_shift(self):
        c = compose_cospans(disk_cospan(2, 2), disk_cospan(2, 1, scale=-1))
        S = c.functor.target
        self.assertEqual(S.objects, ('1', '2', 'b:2'))
        self.assertEqual([(a.name, a.src, a.tgt, a.deg) for a in S.presentation.arrows],
                         [('rho1', '1', '2', 0), ('b:rho1', '2', 'b:2', -1)])
        self.assertEqual(c.right, ('b:1', '2'))
        self.assertEqual(c.functor.summands('b:1'), [('2', -1), ('b:2', 1)])

    def test_boundary_sizes_must_agree(self):
        with pytest.raises(RefusalError):
            compose_cospans(disk_cospan(2, 1), identity_cospan(['1']))

    def test_cap_shifts_the_earlier_end(self):
        c = cap_cospan([('l', 'a', 'b')], {'l': 1})
        self.assertEqual((c.left, c.right), (('a', 'b'), ()))
        self.assertEqual(c.functor.summands('a'), [('l', 3)])
        self.assertEqual(c.functor.summands('b'), [('l', 0)])
        self.assertEqual(c.coefficients(), {'a': -1, 'b': -1})

    def test_closing_a_cycle_adjoins_an_inverse_pair(self):
        disk = disk_cospan(1, 0, labels=('a', 'b'))
        cap = cap_cospan([('l', 'a', 'b')], {'l': 1})
        g = glue_apex(disk, cap)
        self.assertEqual(g.pairs, {'l': ('t_l', 's_l')})
        self.assertEqual(g.closing, [('b', 't_l', 's_l')])
        self.assertEqual([(a.name, a.src, a.tgt, a.deg, a.weight) for a in g.presentation.arrows],
                         [('t_l', '1', '1', 2, 1), ('s_l', '1', '1', -2, -1)])
        c = compose_cospans(disk, cap, weight_window=(-2, 2))
        S = c.functor.target
        self.assertEqual(sorted(S.degree(m) for m in S.hom('1', '1')), [-4, -2, 0, 2, 4])
        self.assertEqual(nonzero(c.relative_class.bounding[0]), {(S.index('s_l'), ('1', (S.index('t_l'),))): 1})
        self.assertEqual(c.witnesses, [{}])

    def test_koszul_disk_cospan(self):
        c = disk_cospan(2, 1, koszul=True, labels=('x', 'p', 'q'))
        self.assertEqual((c.left, c.right), (('x',), ('p', 'q')))
        self.assertEqual(c.functor.summands('x'), [('1', 1), ('2', 1)])
        self.assertEqual(c.coefficients(), {'x': 1, 'p': 1, 'q': 1})


def random_cells(seed):
    """Cells glued along a random leg into a random presentation."""
    rng = random.Random(seed)
    target = random_presentation(seed)
    closed = [a for a in target.arrows if a.name not in target.differential]
    if closed and rng.random() < 0.5:
        a = rng.choice(closed)
        base = DgPresentation(('b0', 'b1'), (Arrow('s', 'b0', 'b1', a.deg),), name='sphere')
        leg = PresentationMorphism(base, target, {'b0': a.src, 'b1': a.tgt}, {'s': ((1, (a.name,)),)})
        cells = [add_cell('r', 's')]
    else:
        base = DgPresentation(('b0', 'b1'), name='points')
        leg = PresentationMorphism(base, target, {b: rng.choice(target.objects) for b in base.objects}, {})
        cells = []
    cells.append(add_object('new'))
    for i in range(rng.randint(1, 2)):
        cells.append(add_arrow(f"g{i}", rng.choice(base.objects), 'new', rng.choice((-1, 0, 1, 2))))
    return base, cells, leg


def zero_functor(F):
    return DgFunctor(F.source, F.target, F.object_map, {})


class TestRandomPushouts:
    """Cell pushouts of seeded random presentations."""

    @pytest.mark.parametrize("seed", range(20))
    def test_random_cell_pushout_is_a_bimodule_pushout(self, seed):
        cert = verify_bimodule_pushout(pushout_square(*random_cells(seed)))
        assert cert.verdict is True, f"seed {seed}: {cert.cone_homology}"

    @pytest.mark.parametrize("leg", ['f', 'g', 'i', 'j'])
    def test_zero_leg_fails(self, leg):
        for seed in range(3):
            square = pushout_square(*random_cells(seed))
            setattr(square, leg, zero_functor(getattr(square, leg)))
            assert verify_bimodule_pushout(square).verdict is False, f"seed {seed}, zero {leg}"


class TestLocalize(unittest.TestCase):
    """Test cases for Drinfeld localization."""

    def test_contracting_everything_gives_zero(self):
        rel = RelativeClass(1, NegativeCyclicClass(0, [{}], closed=True), [{}])
        result = localize(point_cospan([('pt', 0)], rel))
        self.assertFalse(result.no_homology)
        self.assertTrue(result.is_zero)

    def test_zero_functor_changes_nothing(self):
        S = compile(point())
        beta = {(S.identity('pt'), ('pt', ())): 1}
        rel = RelativeClass(0, NegativeCyclicClass(-1, [{}], closed=True), [beta])
        result = localize(point_cospan([], rel))
        self.assertEqual(result.presentation.objects, S.presentation.objects)
        self.assertEqual(result.presentation.arrows, S.presentation.arrows)
        Q = result.category
        self.assertEqual(result.negative_cyclic.coefficients[0], {(Q.identity('pt'), ('pt', ())): 1})

    def test_contracting_one_end_of_a2(self):
        result = localize(disk_cospan(2, 3), points=['0'])
        self.assertEqual(result.homology, {('2', '2'): {0: 1}})
        self.assertIsNone(result.negative_cyclic)

    def test_right_boundary_must_be_empty(self):
        with pytest.raises(RefusalError):
            localize(disk_cospan(2, 2))

    def test_cones_cannot_be_contracted(self):
        with pytest.raises(RefusalError):
            localize(disk_cospan(2, 3))


class TestJson(unittest.TestCase):
    """Test cases for cospan bundles."""

    def test_reload(self):
        c = disk_cospan(2, 2)
        back = cospan_from_json(json.loads(json.dumps(cospan_to_json(c))))
        self.assertEqual((back.left, back.right), (c.left, c.right))
        self.assertEqual(back.coefficients(), c.coefficients())

    def test_unknown_key_rejected(self):
        doc = cospan_to_json(disk_cospan(1, 1))
        doc['apex'] = {}
        with pytest.raises(SchemaError):
            cospan_from_json(doc)


if __name__ == '__main__':
    unittest.main()
