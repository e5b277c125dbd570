"""
Presentations of dg categories and their compiled finite models.

A presentation is a dg quiver with relations. ``compile`` turns it into a
FiniteDgCategory: a monomial basis (paths modulo the relation span, reduced
with a degree-lexicographic path order), a composition table and the
differential, all checked exactly. Composition is written left to right:
for a: x → y and b: y → z the path "a.b" is a morphism x → z.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field as dc_field
from functools import cached_property
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from cache_manager import cached
from errors import CompileError, IntegrityError, PresentationError, SchemaError
from exactla import QQ, Field, row_reduce
from monitoring import logger, track_performance

IDENTITY_PREFIX = '1@'
MAX_PATH_LENGTH = 24
MAX_PATHS = 200000

Path = Tuple[str, ...]
LinComb = Tuple[Tuple[Fraction, Path], ...]


def identity_path(obj: str) -> Path:
    return (IDENTITY_PREFIX + obj,)


def is_identity_path(path: Sequence[str]) -> bool:
    return len(path) == 1 and path[0].startswith(IDENTITY_PREFIX)


def concat(p: Path, q: Path) -> Path:
    """Concatenate two composable paths, absorbing identities."""
    if is_identity_path(p):
        return q
    if is_identity_path(q):
        return p
    return p + q


def path_name(path: Path) -> str:
    return '.'.join(path)


@dataclass(frozen=True)
class Arrow:
    name: str
    src: str
    tgt: str
    deg: int
    weight: int = 0


def _lincomb(terms: Iterable) -> LinComb:
    out = []
    for coef, path in terms:
        out.append((Fraction(coef), tuple(path)))
    return tuple(out)


@dataclass(frozen=True)
class DgPresentation:
    """
    A dg quiver with relations.

    ``differential`` maps an arrow name to a linear combination of paths;
    ``relations`` are linear combinations of parallel paths.
    """
    objects: Tuple[str, ...] = ()
    arrows: Tuple[Arrow, ...] = ()
    differential: Mapping[str, LinComb] = dc_field(default_factory=dict)
    relations: Tuple[LinComb, ...] = ()
    name: str = ''

    def __post_init__(self):
        object.__setattr__(self, 'objects', tuple(self.objects))
        object.__setattr__(self, 'arrows', tuple(self.arrows))
        object.__setattr__(self, 'differential',
                           {k: _lincomb(v) for k, v in dict(self.differential).items() if v})
        object.__setattr__(self, 'relations', tuple(_lincomb(r) for r in self.relations))

    def __hash__(self):
        return hash((self.objects, self.arrows, tuple(sorted(self.differential.items())), self.relations))

    def arrow(self, name: str) -> Arrow:
        for a in self.arrows:
            if a.name == name:
                return a
        raise PresentationError("unknown arrow", name)

    @cached_property
    def arrow_table(self) -> Dict[str, Arrow]:
        return {a.name: a for a in self.arrows}

    def endpoints(self, path: Sequence[str]) -> Tuple[str, str]:
        """Source and target object of a path."""
        if is_identity_path(path):
            obj = path[0][len(IDENTITY_PREFIX):]
            if obj not in self.objects:
                raise PresentationError("identity on unknown object", path[0])
            return obj, obj
        if not path:
            raise PresentationError("empty path")
        table = self.arrow_table
        for tok in path:
            if tok not in table:
                raise PresentationError("unknown arrow", tok)
        for a, b in zip(path, path[1:]):
            if table[a].tgt != table[b].src:
                raise PresentationError("path is not composable", path_name(tuple(path)))
        return table[path[0]].src, table[path[-1]].tgt

    def grading(self, path: Sequence[str]) -> Tuple[int, int]:
        """(degree, weight) of a path."""
        if is_identity_path(path):
            return 0, 0
        table = self.arrow_table
        return sum(table[t].deg for t in path), sum(table[t].weight for t in path)

    def validate(self) -> None:
        """Raise PresentationError unless the presentation is well formed."""
        if len(set(self.objects)) != len(self.objects):
            raise PresentationError("object labels are not unique")
        names = [a.name for a in self.arrows]
        if len(set(names)) != len(names):
            raise PresentationError("arrow names are not unique")
        for a in self.arrows:
            if a.src not in self.objects or a.tgt not in self.objects:
                raise PresentationError("arrow endpoint is not an object", a.name)
            if a.name.startswith(IDENTITY_PREFIX) or '.' in a.name:
                raise PresentationError("reserved character in arrow name", a.name)
        table = self.arrow_table
        for name, terms in self.differential.items():
            if name not in table:
                raise PresentationError("differential of unknown arrow", name)
            a = table[name]
            for _, path in terms:
                if self.endpoints(path) != (a.src, a.tgt):
                    raise PresentationError("differential term not parallel to its arrow", name)
                if self.grading(path) != (a.deg + 1, a.weight):
                    raise PresentationError("differential must raise degree by 1 and keep weight", name)
        for i, rel in enumerate(self.relations):
            if not rel:
                continue
            ends = {self.endpoints(p) for _, p in rel}
            grades = {self.grading(p) for _, p in rel}
            if len(ends) != 1:
                raise PresentationError("relation terms are not parallel", f"relation {i}")
            if len(grades) != 1:
                raise PresentationError("relation is not homogeneous", f"relation {i}")


def coproduct(ps: Sequence[DgPresentation], prefixes: Sequence[str] = None) -> DgPresentation:
    """
    Disjoint union of presentations.

    Objects and arrows of the i-th summand get the prefix ``prefixes[i]``
    (default "<i>:") whenever labels would collide.
    """
    ps = list(ps)
    seen_objs = [o for p in ps for o in p.objects]
    seen_arrows = [a.name for p in ps for a in p.arrows]
    clash = len(set(seen_objs)) != len(seen_objs) or len(set(seen_arrows)) != len(seen_arrows)
    if prefixes is None:
        prefixes = [f"{i}:" if clash else '' for i in range(len(ps))]
    objects, arrows, diff, rels = [], [], {}, []
    for pre, p in zip(prefixes, ps):
        r = relabel(p, {o: pre + o for o in p.objects}, {a.name: pre + a.name for a in p.arrows})
        objects.extend(r.objects)
        arrows.extend(r.arrows)
        diff.update(r.differential)
        rels.extend(r.relations)
    return DgPresentation(tuple(objects), tuple(arrows), diff, tuple(rels),
                          name='+'.join(p.name for p in ps))


def _rename_path(path: Path, objs: Mapping[str, str], arrows: Mapping[str, str]) -> Path:
    if is_identity_path(path):
        obj = path[0][len(IDENTITY_PREFIX):]
        return identity_path(objs.get(obj, obj))
    return tuple(arrows.get(t, t) for t in path)


def relabel(p: DgPresentation, objs: Mapping[str, str], arrows: Mapping[str, str]) -> DgPresentation:
    """Rename objects and arrows."""
    def lc(terms):
        return tuple((c, _rename_path(path, objs, arrows)) for c, path in terms)
    return DgPresentation(
        tuple(objs.get(o, o) for o in p.objects),
        tuple(Arrow(arrows.get(a.name, a.name), objs.get(a.src, a.src), objs.get(a.tgt, a.tgt), a.deg, a.weight)
              for a in p.arrows),
        {arrows.get(k, k): lc(v) for k, v in p.differential.items()},
        tuple(lc(r) for r in p.relations),
        p.name,
    )


# ---------------------------------------------------------------------------
# built-in presentations

def point(label: str = 'pt') -> DgPresentation:
    """The one-object category k."""
    return DgPresentation((label,), name='point')


def path_category(n: int) -> DgPresentation:
    """The A_n quiver 1 → 2 → … → n, arrows rho{i} of degree 0, no relations."""
    if n < 1:
        raise PresentationError("A_n needs n >= 1")
    objs = tuple(str(i) for i in range(1, n + 1))
    arrows = tuple(Arrow(f"rho{i}", str(i), str(i + 1), 0) for i in range(1, n))
    return DgPresentation(objs, arrows, name=f"A{n}")


def laurent(p: int, label: str = 'o') -> DgPresentation:
    """k[t, t^-1] with |t| = 2p; t has weight 1 and its inverse s weight -1."""
    e = identity_path(label)
    return DgPresentation(
        (label,),
        (Arrow('t', label, label, 2 * p, 1), Arrow('s', label, label, -2 * p, -1)),
        relations=(((1, ('t', 's')), (-1, e)), ((1, ('s', 't')), (-1, e))),
        name=f"laurent{2 * p}",
    )


def dual_numbers(deg: int = 0, label: str = 'o', weight: int = 0) -> DgPresentation:
    """k[x]/x² with |x| = deg and x of the given weight."""
    return DgPresentation((label,), (Arrow('x', label, label, deg, weight),),
                          relations=(((1, ('x', 'x')),),), name=f"dual{deg}")


def exterior(deg: int = 1, label: str = 'o') -> DgPresentation:
    """The exterior algebra Λ[ε], |ε| = deg."""
    p = DgPresentation((label,), (Arrow('eps', label, label, deg),),
                       relations=(((1, ('eps', 'eps')),),), name=f"exterior{deg}")
    return p


def disk_cell(deg: int = 0) -> DgPresentation:
    """Two objects with arrows s (degree deg) and r (degree deg-1), d(r) = s."""
    return DgPresentation(
        ('1', '2'),
        (Arrow('s', '1', '2', deg), Arrow('r', '1', '2', deg - 1)),
        {'r': ((1, ('s',)),)},
        name=f"D{deg}",
    )


def sphere_cell(deg: int = 0) -> DgPresentation:
    """Two objects with a single closed arrow s of degree deg."""
    return DgPresentation(('1', '2'), (Arrow('s', '1', '2', deg),), name=f"S{deg}")


def koszul_path(n: int, labels: Sequence[str] = None) -> DgPresentation:
    """
    The A_n quiver with arrows a{i} of degree 1 and weight 1 and all
    consecutive composites a{i}.a{i+1} set to zero.
    """
    if n < 1:
        raise PresentationError("E_n needs n >= 1")
    objs = tuple(labels) if labels is not None else tuple(str(i) for i in range(1, n + 1))
    if len(objs) != n:
        raise PresentationError("koszul_path needs one label per object")
    arrows = tuple(Arrow(f"a{i}", objs[i - 1], objs[i], 1, 1) for i in range(1, n))
    relations = tuple(((1, (f"a{i}", f"a{i + 1}")),) for i in range(1, n - 1))
    return DgPresentation(objs, arrows, relations=relations, name=f"E{n}")


def random_presentation(seed: int, max_objects: int = 3, max_arrows: int = 4,
                        degrees: Sequence[int] = (-1, 0, 1, 2)) -> DgPresentation:
    """
    A seeded random presentation with a nilpotent radical.

    Arrows run from lower to higher objects. Some composable pairs are set
    to zero, parallel pairs of equal degree may be identified, and an arrow
    parallel to a closed composite of the right degree may get it as
    differential.
    """
    rng = random.Random(seed)
    objs = tuple(str(i) for i in range(1, rng.randint(1, max_objects) + 1))
    arrows = []
    if len(objs) > 1:
        for i in range(rng.randint(0, max_arrows)):
            src, tgt = sorted(rng.sample(range(len(objs)), 2))
            arrows.append(Arrow(f"f{i}", objs[src], objs[tgt], rng.choice(degrees)))
    composites = [(a, b) for a in arrows for b in arrows if a.tgt == b.src]
    relations = [((1, (a.name, b.name)),) for a, b in composites if rng.random() < 0.4]
    killed = {rel[0][1] for rel in relations}
    alive = [(a, b) for a, b in composites if (a.name, b.name) not in killed]
    for (a, b), (c, e) in zip(alive, alive[1:]):
        same_ends = (a.src, b.tgt) == (c.src, e.tgt)
        if same_ends and a.deg + b.deg == c.deg + e.deg and rng.random() < 0.5:
            relations.append(((1, (a.name, b.name)), (-1, (c.name, e.name))))
    differential = {}
    used = {name for rel in relations for _, path in rel for name in path}
    letters = set()
    for x in arrows:
        if x.name in used or x.name in letters or rng.random() < 0.5:
            continue
        for a, b in alive:
            if (a.src, b.tgt) == (x.src, x.tgt) and a.deg + b.deg == x.deg + 1 \
                    and not {a.name, b.name} & (set(differential) | {x.name}):
                differential[x.name] = ((1, (a.name, b.name)),)
                letters.update((a.name, b.name))
                break
    return DgPresentation(objs, tuple(arrows), differential, tuple(relations), name=f"random{seed}")


BUILTINS = {
    'point': lambda: point(),
    'dual': dual_numbers,
    'exterior': exterior,
    'disk_cell': disk_cell,
}


# ---------------------------------------------------------------------------
# JSON

SCHEMA_VERSION = 1


def _check_keys(doc, allowed, path, required=()):
    if not isinstance(doc, dict):
        raise SchemaError(path, "expected an object")
    extra = set(doc) - set(allowed)
    if extra:
        raise SchemaError(path, f"unknown keys {sorted(extra)}")
    for key in required:
        if key not in doc:
            raise SchemaError(path, f"missing key {key!r}")


def coef_to_json(c) -> List[int]:
    c = Fraction(c)
    return [c.numerator, c.denominator]


def coef_from_json(pair, path) -> Fraction:
    if (not isinstance(pair, list) or len(pair) != 2
            or not all(isinstance(v, int) and not isinstance(v, bool) for v in pair) or pair[1] == 0):
        raise SchemaError(path, "coefficients are [numerator, denominator] integer pairs")
    return Fraction(pair[0], pair[1])


def _lincomb_to_json(terms: LinComb):
    return [coef_to_json(c) + [list(p)] for c, p in terms]


def _lincomb_from_json(doc, path) -> LinComb:
    if not isinstance(doc, list):
        raise SchemaError(path, "expected a list of terms")
    out = []
    for i, term in enumerate(doc):
        if not isinstance(term, list) or len(term) != 3 or not isinstance(term[2], list):
            raise SchemaError(f"{path}[{i}]", "terms are [num, den, [path...]]")
        out.append((coef_from_json(term[:2], f"{path}[{i}]"), tuple(str(t) for t in term[2])))
    return tuple(out)


def presentation_to_json(p: DgPresentation) -> dict:
    return {
        'schema': SCHEMA_VERSION,
        'name': p.name,
        'objects': list(p.objects),
        'arrows': [{'name': a.name, 'src': a.src, 'tgt': a.tgt, 'deg': a.deg, 'weight': a.weight}
                   for a in p.arrows],
        'differential': {k: _lincomb_to_json(v) for k, v in sorted(p.differential.items())},
        'relations': [_lincomb_to_json(r) for r in p.relations],
    }


def presentation_from_json(doc, path: str = '$') -> DgPresentation:
    """Parse a schema-1 presentation document; the result is validated."""
    _check_keys(doc, {'schema', 'name', 'objects', 'arrows', 'differential', 'relations'}, path,
                required=('schema', 'objects'))
    if doc['schema'] != SCHEMA_VERSION:
        raise SchemaError(f"{path}.schema", f"unsupported schema {doc['schema']!r}")
    arrows = []
    for i, a in enumerate(doc.get('arrows', [])):
        where = f"{path}.arrows[{i}]"
        _check_keys(a, {'name', 'src', 'tgt', 'deg', 'weight'}, where, required=('name', 'src', 'tgt', 'deg'))
        if not isinstance(a['deg'], int) or not isinstance(a.get('weight', 0), int):
            raise SchemaError(where, "deg and weight are integers")
        arrows.append(Arrow(str(a['name']), str(a['src']), str(a['tgt']), a['deg'], a.get('weight', 0)))
    diff = doc.get('differential', {})
    if not isinstance(diff, dict):
        raise SchemaError(f"{path}.differential", "expected an object")
    p = DgPresentation(
        tuple(str(o) for o in doc['objects']),
        tuple(arrows),
        {k: _lincomb_from_json(v, f"{path}.differential.{k}") for k, v in diff.items()},
        tuple(_lincomb_from_json(r, f"{path}.relations[{i}]") for i, r in enumerate(doc.get('relations', []))),
        str(doc.get('name', '')),
    )
    p.validate()
    return p


# ---------------------------------------------------------------------------
# compiled categories

@dataclass(frozen=True)
class Monomial:
    index: int
    path: Path
    src: str
    tgt: str
    degree: int
    weight: int

    @property
    def name(self) -> str:
        return path_name(self.path)

    @property
    def is_identity(self) -> bool:
        return is_identity_path(self.path)


class FiniteDgCategory:
    """
    Basis-level model of a compiled presentation.

    Elements are sparse dicts monomial index -> scalar. ``mul(i, j)`` is the
    composite "i then j"; it is empty when the monomials are not composable
    or the product leaves the weight window.
    """

    def __init__(self, objects, monomials, mult, diff, field, presentation=None,
                 nilpotent_radical=True, weight_window=None, degree_window=None, truncated=False):
        self.objects: Tuple[str, ...] = tuple(objects)
        self.monomials: List[Monomial] = list(monomials)
        self.field: Field = field
        self._mult: Dict[Tuple[int, int], Dict[int, object]] = mult
        self._diff: Dict[int, Dict[int, object]] = diff
        self.presentation = presentation
        self.nilpotent_radical = nilpotent_radical
        self.weight_window = weight_window
        self.degree_window = degree_window
        self.truncated = truncated
        self._by_name = {m.name: m.index for m in self.monomials}
        self._hom: Dict[Tuple[str, str], List[int]] = {}
        self._identities: Dict[str, int] = {}
        for m in self.monomials:
            self._hom.setdefault((m.src, m.tgt), []).append(m.index)
            if m.is_identity:
                self._identities[m.src] = m.index
        self._out: Dict[str, List[int]] = {}
        for m in self.monomials:
            self._out.setdefault(m.src, []).append(m.index)
        self.weight_periodic = self._find_units()

    def __len__(self):
        return len(self.monomials)

    def __repr__(self):
        return f"FiniteDgCategory({self.name!r}, objects={len(self.objects)}, basis={len(self.monomials)})"

    @property
    def name(self) -> str:
        return self.presentation.name if self.presentation is not None else ''

    def hom(self, x: str, y: str) -> List[int]:
        return list(self._hom.get((x, y), []))

    def starting_at(self, x: str) -> List[int]:
        return list(self._out.get(x, []))

    def hom_dims(self) -> Dict[Tuple[str, str], int]:
        return {(x, y): len(self._hom.get((x, y), [])) for x in self.objects for y in self.objects}

    def identity(self, x: str) -> int:
        return self._identities[x]

    def index(self, name: str) -> int:
        try:
            return self._by_name[name]
        except KeyError:
            raise PresentationError("unknown monomial", name) from None

    def element(self, terms: Mapping[str, object]) -> Dict[int, object]:
        """Build an element from monomial names (identity paths as '1@x')."""
        out = {}
        for name, c in terms.items():
            c = self.field.coerce(c) if not isinstance(c, Fraction) else self.field.from_pair(c.numerator, c.denominator)
            if c:
                out[self.index(name)] = c
        return out

    def degree(self, i: int) -> int:
        return self.monomials[i].degree

    def weight(self, i: int) -> int:
        return self.monomials[i].weight

    def src(self, i: int) -> str:
        return self.monomials[i].src

    def tgt(self, i: int) -> str:
        return self.monomials[i].tgt

    def is_identity(self, i: int) -> bool:
        return self.monomials[i].is_identity

    def in_window(self, weight: int) -> bool:
        if self.weight_window is None:
            return True
        return self.weight_window[0] <= weight <= self.weight_window[1]

    def mul(self, i: int, j: int) -> Dict[int, object]:
        return self._mult.get((i, j), {})

    def mul_vec(self, u: Mapping[int, object], v: Mapping[int, object]) -> Dict[int, object]:
        out: Dict[int, object] = {}
        for i, a in u.items():
            for j, b in v.items():
                for k, c in self._mult.get((i, j), {}).items():
                    _accumulate(out, k, a * b * c)
        return out

    def d(self, i: int) -> Dict[int, object]:
        return self._diff.get(i, {})

    def d_vec(self, u: Mapping[int, object]) -> Dict[int, object]:
        out: Dict[int, object] = {}
        for i, a in u.items():
            for k, c in self._diff.get(i, {}).items():
                _accumulate(out, k, a * c)
        return out

    @property
    def has_differential(self) -> bool:
        return bool(self._diff)

    def _find_units(self):
        if self.weight_window is None or self.nilpotent_radical:
            return None
        units = {}
        for x in self.objects:
            e = {self.identity(x): self.field.one}
            found = None
            for u in self.hom(x, x):
                if self.weight(u) != 1:
                    continue
                for v in self.hom(x, x):
                    if self.weight(v) == -1 and self.mul(u, v) == e and self.mul(v, u) == e:
                        found = (u, v)
                        break
                if found:
                    break
            if found is None:
                return None
            units[x] = found
        return units


def _accumulate(out: Dict[int, object], k: int, v) -> None:
    s = out.get(k, 0) + v
    if s:
        out[k] = s
    else:
        out.pop(k, None)


class _PathSpace:
    """Paths up to a length bound, ordered by (length, arrow order)."""

    def __init__(self, p: DgPresentation, bound: int):
        self.p = p
        order = {a.name: i for i, a in enumerate(p.arrows)}
        obj_order = {o: i for i, o in enumerate(p.objects)}
        outgoing: Dict[str, List[Arrow]] = {o: [] for o in p.objects}
        for a in p.arrows:
            outgoing[a.src].append(a)
        layers: List[List[Path]] = [[identity_path(o) for o in p.objects]]
        count = len(layers[0])
        for length in range(1, bound + 1):
            if length == 1:
                layer = [(a.name,) for a in p.arrows]
            else:
                table = p.arrow_table
                layer = [path + (a.name,) for path in layers[-1] for a in outgoing[table[path[-1]].tgt]]
            count += len(layer)
            if count > MAX_PATHS:
                raise CompileError(f"more than {MAX_PATHS} paths of length <= {bound}", p.name)
            layers.append(layer)
        self.layers = layers

        def key(path):
            if is_identity_path(path):
                return (0, (obj_order[path[0][len(IDENTITY_PREFIX):]],))
            return (len(path), tuple(order[t] for t in path))

        self.paths: List[Path] = sorted((q for layer in layers for q in layer), key=key)
        self.index = {q: i for i, q in enumerate(self.paths)}
        self.bound = bound

    @staticmethod
    def length(path: Path) -> int:
        return 0 if is_identity_path(path) else len(path)


def _field_coef(field: Field, c: Fraction):
    return field.from_pair(c.numerator, c.denominator)


def _ideal_rows(space: _PathSpace, field: Field) -> List[Dict[int, object]]:
    p = space.p
    rows = []
    for rel in p.relations:
        if not rel:
            continue
        src, tgt = p.endpoints(rel[0][1])
        rlen = max(space.length(q) for _, q in rel)
        for lu in range(0, space.bound - rlen + 1):
            for u in space.layers[lu]:
                if p.endpoints(u)[1] != src:
                    continue
                for lv in range(0, space.bound - rlen - lu + 1):
                    for v in space.layers[lv]:
                        if p.endpoints(v)[0] != tgt:
                            continue
                        row: Dict[int, object] = {}
                        for c, q in rel:
                            _accumulate(row, space.index[concat(concat(u, q), v)], _field_coef(field, c))
                        if row:
                            rows.append(row)
    return rows


class _Reducer:
    """Normal forms modulo the relation span at a fixed length bound."""

    def __init__(self, p: DgPresentation, bound: int, field: Field):
        self.space = _PathSpace(p, bound)
        self.field = field
        self.echelon = row_reduce(_ideal_rows(self.space, field), len(self.space.paths), field, leading=True)

    def is_normal(self, path: Path) -> bool:
        return self.space.index[path] not in self.echelon.pivots

    def normal_paths(self) -> List[Path]:
        return [q for i, q in enumerate(self.space.paths) if i not in self.echelon.pivots]

    def reduce(self, terms: Mapping[Path, object]) -> Dict[Path, object]:
        out: Dict[Path, object] = {}
        for q, c in terms.items():
            col = self.space.index.get(q)
            if col is None:
                raise CompileError(f"path {path_name(q)} exceeds the reduction bound", self.space.p.name)
            row = self.echelon.pivots.get(col)
            if row is None:
                _accumulate(out, q, c)
                continue
            for k, v in row.items():
                if k != col:
                    _accumulate(out, self.space.paths[k], -c * v)
        return out


def _path_differential(p: DgPresentation, path: Path, field: Field) -> Dict[Path, object]:
    """Leibniz extension of the arrow differential to a path."""
    out: Dict[Path, object] = {}
    if is_identity_path(path):
        return out
    table = p.arrow_table
    sign_deg = 0
    for i, tok in enumerate(path):
        for c, q in p.differential.get(tok, ()):
            new = concat(concat(path[:i] or identity_path(table[tok].src), q),
                         path[i + 1:] or identity_path(table[tok].tgt))
            _accumulate(out, new, (-1) ** (sign_deg % 2) * _field_coef(field, c))
        sign_deg += table[tok].deg
    return out


def _compile_key(p, degree_window=None, weight_window=None, field=QQ, max_length=MAX_PATH_LENGTH):
    return [presentation_to_json(p), degree_window and list(degree_window),
            weight_window and list(weight_window), field.name, max_length]


@cached(key_func=_compile_key)
@track_performance
def compile(p: DgPresentation, degree_window: Tuple[int, int] = None, weight_window: Tuple[int, int] = None,
            field: Field = QQ, max_length: int = MAX_PATH_LENGTH) -> FiniteDgCategory:
    """
    Compile a presentation to its finite basis-level model.

    Args:
        p: The presentation
        degree_window: Recorded on the result for downstream windowing
        weight_window: Inclusive weight interval; required when path
            enumeration does not terminate
        field: Scalar field
        max_length: Longest path length explored before refusing

    Returns:
        FiniteDgCategory

    Raises:
        PresentationError: malformed input, d not compatible with relations, d² ∉ ideal
        CompileError: non-terminating enumeration without a usable weight window
    """
    p.validate()
    d_len = max((_PathSpace.length(q) for terms in p.differential.values() for _, q in terms), default=1)
    r_len = max((_PathSpace.length(q) for rel in p.relations for _, q in rel), default=0)

    nilpotent, top = False, None
    for length in range(1, max_length + 1):
        red = _Reducer(p, length, field)
        if all(not red.is_normal(q) for q in red.space.layers[length]):
            nilpotent, top = True, length - 1
            break
        if weight_window is not None and length > 1:
            lo, hi = weight_window
            fresh = [q for q in red.space.layers[length] if red.is_normal(q) and lo <= p.grading(q)[1] <= hi]
            if not fresh:
                prev = [q for q in red.space.layers[length - 1] if red.is_normal(q) and lo <= p.grading(q)[1] <= hi]
                if not prev:
                    top = length - 1
                    break
    if top is None:
        if all(a.weight == 0 for a in p.arrows):
            raise CompileError("path enumeration does not terminate and there is no weight grading", p.name)
        if weight_window is None:
            raise CompileError("path enumeration does not terminate; a weight window is required", p.name)
        raise CompileError(f"normal monomials in the weight window do not stabilize by length {max_length}", p.name)

    bound = max(2 * top, top - 1 + d_len, r_len - 1 + d_len, r_len, 1)
    red = _Reducer(p, bound, field)

    def keep(q: Path) -> bool:
        if _PathSpace.length(q) > top:
            return False
        return nilpotent or weight_window[0] <= p.grading(q)[1] <= weight_window[1]

    basis_paths = [q for q in red.normal_paths() if keep(q)]
    monomials = []
    for i, q in enumerate(basis_paths):
        src, tgt = p.endpoints(q)
        deg, wt = p.grading(q)
        monomials.append(Monomial(i, q, src, tgt, deg, wt))
    where = {q: i for i, q in enumerate(basis_paths)}
    truncated = False

    def to_basis(terms: Mapping[Path, object], context: str) -> Dict[int, object]:
        nonlocal truncated
        out = {}
        for q, c in red.reduce(terms).items():
            if q in where:
                out[where[q]] = c
            elif not nilpotent and not keep(q) and _PathSpace.length(q) <= bound \
                    and not (weight_window[0] <= p.grading(q)[1] <= weight_window[1]):
                truncated = True
            else:
                raise CompileError(f"normal form of {context} leaves the computed basis", p.name)
        return out

    for rel in p.relations:
        raw: Dict[Path, object] = {}
        for c, q in rel:
            for q2, v in _path_differential(p, q, field).items():
                _accumulate(raw, q2, _field_coef(field, c) * v)
        if red.reduce(raw):
            raise PresentationError("the differential does not preserve the relations")

    mult: Dict[Tuple[int, int], Dict[int, object]] = {}
    for m in monomials:
        for n in monomials:
            if m.tgt != n.src:
                continue
            prod = to_basis({concat(m.path, n.path): field.one}, f"{m.name}*{n.name}")
            if prod:
                mult[(m.index, n.index)] = prod
    diff: Dict[int, Dict[int, object]] = {}
    for m in monomials:
        dm = to_basis(_path_differential(p, m.path, field), f"d({m.name})")
        if dm:
            diff[m.index] = dm

    cat = FiniteDgCategory(p.objects, monomials, mult, diff, field, presentation=p,
                           nilpotent_radical=nilpotent, weight_window=None if nilpotent else tuple(weight_window),
                           degree_window=degree_window, truncated=truncated)
    verify_category(cat)
    logger.info("Compiled presentation", name=p.name, basis=len(monomials), nilpotent=nilpotent,
                truncated=truncated)
    return cat


def verify_category(cat: FiniteDgCategory) -> None:
    """
    Exhaustive checks on the basis: units, associativity, Leibniz and d² = 0.

    Products leaving the weight window are skipped.
    """
    one = cat.field.one
    for m in cat.monomials:
        e_src, e_tgt = cat.identity(m.src), cat.identity(m.tgt)
        if cat.mul(e_src, m.index) != {m.index: one} or cat.mul(m.index, e_tgt) != {m.index: one}:
            raise IntegrityError(f"identity law fails for {m.name}")
    for i in range(len(cat)):
        if cat.d_vec(cat.d(i)):
            raise PresentationError("d² does not lie in the relation ideal", cat.monomials[i].name)
    for a in cat.monomials:
        for b_idx in cat.starting_at(a.tgt):
            b = cat.monomials[b_idx]
            if not cat.in_window(a.weight + b.weight):
                continue
            ab = cat.mul(a.index, b.index)
            lhs = cat.d_vec(ab)
            rhs = cat.mul_vec(cat.d(a.index), {b.index: one})
            for k, v in cat.mul_vec({a.index: one}, cat.d(b.index)).items():
                _accumulate(rhs, k, (-1) ** (a.degree % 2) * v)
            if lhs != rhs:
                raise IntegrityError(f"Leibniz rule fails on {a.name}, {b.name}", a.degree + b.degree)
            for c_idx in cat.starting_at(b.tgt):
                c = cat.monomials[c_idx]
                if not (cat.in_window(b.weight + c.weight) and cat.in_window(a.weight + b.weight + c.weight)):
                    continue
                left = cat.mul_vec(ab, {c_idx: one})
                right = cat.mul_vec({a.index: one}, cat.mul(b_idx, c_idx))
                if left != right:
                    raise IntegrityError(f"composition is not associative on {a.name}, {b.name}, {c.name}")


def category_to_presentation(cat: FiniteDgCategory, name: str = None) -> DgPresentation:
    """
    Print a compiled category as a presentation: one arrow per non-identity
    monomial and the full multiplication table as relations.
    """
    def token(i):
        m = cat.monomials[i]
        return m.path if m.is_identity else (f"m{i}",)

    def coef(v):
        return Fraction(*cat.field.to_pair(v))

    arrows = tuple(Arrow(f"m{m.index}", m.src, m.tgt, m.degree, m.weight)
                   for m in cat.monomials if not m.is_identity)
    diff = {f"m{i}": tuple((coef(v), token(k)) for k, v in sorted(cat.d(i).items()))
            for i in range(len(cat)) if cat.d(i) and not cat.is_identity(i)}
    rels = []
    for a in cat.monomials:
        if a.is_identity:
            continue
        for b_idx in cat.starting_at(a.tgt):
            if cat.is_identity(b_idx):
                continue
            terms = [(Fraction(1), (f"m{a.index}", f"m{b_idx}"))]
            terms += [(-coef(v), token(k)) for k, v in sorted(cat.mul(a.index, b_idx).items())]
            rels.append(tuple(terms))
    return DgPresentation(cat.objects, arrows, diff, tuple(rels), name=name or f"{cat.name}*")


def evaluate_path(cat: FiniteDgCategory, path: Path) -> Dict[int, object]:
    """The element of ``cat`` represented by a path of its presentation."""
    name = path_name(path)
    if name in cat._by_name:
        return {cat.index(name): cat.field.one}
    out = None
    for tok in path:
        step = {cat.index(tok): cat.field.one}
        out = step if out is None else cat.mul_vec(out, step)
    return out or {}


def evaluate(cat: FiniteDgCategory, terms: LinComb) -> Dict[int, object]:
    out: Dict[int, object] = {}
    for c, path in terms:
        for k, v in evaluate_path(cat, path).items():
            _accumulate(out, k, _field_coef(cat.field, c) * v)
    return out


@dataclass(frozen=True)
class PresentationMorphism:
    """Objects to objects, arrows to linear combinations of target paths."""
    source: DgPresentation
    target: DgPresentation
    objects: Mapping[str, str]
    arrows: Mapping[str, LinComb]

    def __post_init__(self):
        object.__setattr__(self, 'objects', dict(self.objects))
        object.__setattr__(self, 'arrows', {k: _lincomb(v) for k, v in dict(self.arrows).items()})

    def validate(self) -> None:
        for o in self.source.objects:
            if self.objects.get(o) not in self.target.objects:
                raise PresentationError("object has no image", o)
        for a in self.source.arrows:
            for _, q in self.arrows.get(a.name, ()):
                ends = self.target.endpoints(q)
                if ends != (self.objects[a.src], self.objects[a.tgt]):
                    raise PresentationError("arrow image has wrong endpoints", a.name)
                if self.target.grading(q)[0] != a.deg:
                    raise PresentationError("arrow image has wrong degree", a.name)


class DgFunctor:
    """A strict dg functor between compiled categories, given on the monomial basis."""

    def __init__(self, source: FiniteDgCategory, target: FiniteDgCategory,
                 object_map: Mapping[str, str], images: Mapping[int, Mapping[int, object]]):
        self.source, self.target = source, target
        self.object_map = dict(object_map)
        self.images = {i: dict(v) for i, v in images.items() if v}

    @classmethod
    def identity(cls, cat: FiniteDgCategory) -> 'DgFunctor':
        return cls(cat, cat, {o: o for o in cat.objects}, {i: {i: cat.field.one} for i in range(len(cat))})

    @classmethod
    def from_morphism(cls, m: PresentationMorphism, source: FiniteDgCategory,
                      target: FiniteDgCategory) -> 'DgFunctor':
        m.validate()
        arrow_images = {name: evaluate(target, terms) for name, terms in m.arrows.items()}
        images = {}
        for mono in source.monomials:
            if mono.is_identity:
                images[mono.index] = {target.identity(m.objects[mono.src]): target.field.one}
                continue
            out = None
            for tok in mono.path:
                step = arrow_images.get(tok, {})
                out = step if out is None else target.mul_vec(out, step)
            images[mono.index] = out or {}
        f = cls(source, target, m.objects, images)
        f.check()
        return f

    def apply(self, vec: Mapping[int, object]) -> Dict[int, object]:
        out: Dict[int, object] = {}
        for i, a in vec.items():
            for k, v in self.images.get(i, {}).items():
                _accumulate(out, k, a * v)
        return out

    def check(self) -> None:
        """Compatibility with d, composition and identities on the basis."""
        src, tgt = self.source, self.target
        one = src.field.one
        for m in src.monomials:
            if self.apply(src.d(m.index)) != tgt.d_vec(self.apply({m.index: one})):
                raise IntegrityError(f"functor does not commute with d on {m.name}")
            if m.is_identity and self.apply({m.index: one}) != {tgt.identity(self.object_map[m.src]): one}:
                raise IntegrityError(f"functor does not preserve the identity of {m.src}")
            for j in src.starting_at(m.tgt):
                if not src.in_window(m.weight + src.weight(j)):
                    continue
                lhs = self.apply(src.mul(m.index, j))
                rhs = tgt.mul_vec(self.apply({m.index: one}), self.apply({j: one}))
                if lhs != rhs:
                    raise IntegrityError(f"functor does not preserve composition at {m.name}")
