"""
Gluing: cell pushouts of presentations, composition of Calabi-Yau cospans
and Drinfeld localization.

A cospan A → X ← A′ is stored as one functor from the coproduct of the
boundary points into Perf(X) together with a relative class. The left
boundary enters with the opposite orientation: its boundary class is −α|_A
while the right boundary class is α|_{A′}. Two cospans compose when the
right boundary class of the first equals the left boundary class of the
second, that is when α1|_{A′} + α2|_{A′} is a boundary.

Glued boundary images must be shifted representables. Objects are then
identified up to shift, and a point whose two images already coincide
adjoins an invertible loop.
"""

from dataclasses import dataclass, field as dc_field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from bimodules import (
    DiagonalBimodule, FreeBimodule, FreeMap, Generator, bar_resolution, complex_from_basis, free_cone, induce,
    sign,
)
from cyduality import CyReport, PerfectModule, QuasiIsoCertificate, _certificate
from cykit_config import get_settings
from dgcore import (
    Arrow, DgFunctor, DgPresentation, FiniteDgCategory, PresentationMorphism, _accumulate, _check_keys,
    _rename_path, compile, coproduct, identity_path, path_name, point, relabel,
)
from errors import (
    CompileError, IntegrityError, MismatchError, ObstructionError, PresentationError, RefusalError, SchemaError,
    WindowError,
)
from exactla import HomologyDims, cone, field_from_settings, homology_dims
from hochschild import (
    Chain, HochschildClass, NegativeCyclicClass, RelativeClass, chain_from_json, chain_to_json,
    lift_to_negative_cyclic, mixed_complex,
)
from monitoring import logger, track_performance
from relcy import (
    FunctorData, canonical_relative_class, check_relative_left_cy, functor_from_json, functor_to_json, koszul_functor,
    relative_class_from_json, relative_class_to_json, standard_functor,
)


# ---------------------------------------------------------------------------
# cell attachments and pushouts

CELL_KINDS = ('object', 'arrow', 'cell')


@dataclass(frozen=True)
class CellAttachment:
    """
    One generating cell: a new object, a free arrow, or an arrow r with
    d(r) = s for an existing closed arrow s (then deg r = deg s − 1).
    """

    kind: str
    name: str
    src: str = ''
    tgt: str = ''
    deg: Optional[int] = None
    weight: int = 0
    boundary: str = ''

    def __post_init__(self):
        if self.kind not in CELL_KINDS:
            raise PresentationError("unknown cell kind", self.kind)
        if self.kind == 'cell' and not self.boundary:
            raise PresentationError("a cell needs the arrow it bounds", self.name)


def add_object(name: str) -> CellAttachment:
    return CellAttachment('object', name)


def add_arrow(name: str, src: str, tgt: str, deg: int = 0, weight: int = 0) -> CellAttachment:
    return CellAttachment('arrow', name, src, tgt, deg, weight)


def add_cell(name: str, boundary: str, deg: Optional[int] = None) -> CellAttachment:
    """r with d(r) = boundary; a given ``deg`` must equal deg(boundary) − 1."""
    return CellAttachment('cell', name, deg=deg, boundary=boundary)


def _attach(target: DgPresentation, cells: Sequence[CellAttachment], base: DgPresentation,
            objects: Mapping[str, str], images: Mapping[str, Tuple], operation: str) -> DgPresentation:
    """
    Add ``cells`` to ``target``. Base objects and base arrows named by the
    cells are read through ``objects`` and ``images``.
    """
    objs, arrows = list(target.objects), list(target.arrows)
    diff = dict(target.differential)
    taken = {a.name for a in arrows}
    added: Dict[str, Arrow] = {}
    new_objects = set()

    def endpoint(o: str) -> str:
        if o in new_objects:
            return o
        if o in objects:
            return objects[o]
        raise RefusalError(operation, f"the attaching map is not defined on object {o!r}")

    for cell in cells:
        if cell.kind == 'object':
            if cell.name in objs:
                raise RefusalError(operation, f"object {cell.name!r} already exists")
            objs.append(cell.name)
            new_objects.add(cell.name)
            continue
        if cell.name in taken or cell.name in added:
            raise RefusalError(operation, f"arrow {cell.name!r} already exists")
        if cell.kind == 'arrow':
            a = Arrow(cell.name, endpoint(cell.src), endpoint(cell.tgt), cell.deg or 0, cell.weight)
        else:
            if cell.boundary in added:
                s = added[cell.boundary]
                terms, src, tgt = ((1, (s.name,)),), s.src, s.tgt
            elif cell.boundary in base.arrow_table:
                if cell.boundary not in images:
                    raise RefusalError(operation, f"the attaching map is not defined on arrow {cell.boundary!r}")
                s = base.arrow(cell.boundary)
                terms, src, tgt = images[cell.boundary], endpoint(s.src), endpoint(s.tgt)
            else:
                raise RefusalError(operation, f"unknown boundary arrow {cell.boundary!r}")
            if cell.deg is not None and cell.deg != s.deg - 1:
                raise RefusalError(operation, f"cell {cell.name!r} must have degree {s.deg - 1}")
            a = Arrow(cell.name, src, tgt, s.deg - 1, s.weight)
            if terms:
                diff[cell.name] = terms
        arrows.append(a)
        added[a.name] = a
    p = DgPresentation(tuple(objs), tuple(arrows), diff, target.relations, target.name)
    p.validate()
    return p


def attach(base: DgPresentation, cells: Sequence[CellAttachment]) -> DgPresentation:
    """The relative cell complex base ∪ cells."""
    images = {a.name: ((1, (a.name,)),) for a in base.arrows}
    p = _attach(base, cells, base, {o: o for o in base.objects}, images, "attach")
    return DgPresentation(p.objects, p.arrows, p.differential, p.relations, f"{base.name}+cells")


def pushout(base: DgPresentation, cells: Sequence[CellAttachment], leg: PresentationMorphism) -> DgPresentation:
    """
    The pushout of base ∪ cells ← base → leg.target: the cells transported
    along ``leg``.

    Raises:
        RefusalError: ``leg`` is undefined on some attaching object or arrow,
            or a transported cell clashes with an existing name
    """
    if leg.source != base:
        raise RefusalError("pushout", "the leg does not start at the base presentation")
    p = _attach(leg.target, cells, base, leg.objects, leg.arrows, "pushout")
    logger.debug("Pushout built", base=base.name, target=leg.target.name, cells=len(cells))
    return DgPresentation(p.objects, p.arrows, p.differential, p.relations, f"{leg.target.name}+cells")


# ---------------------------------------------------------------------------
# pushout squares of bimodules

@dataclass
class PushoutSquare:
    """
    A commuting square of strict functors

        A  --f-->  A′
        |g         |j
        B  --i-->  B′
    """

    f: DgFunctor
    g: DgFunctor
    i: DgFunctor
    j: DgFunctor

    def commutes(self) -> bool:
        A = self.f.source
        one = A.field.one
        for x in A.objects:
            if self.i.object_map[self.g.object_map[x]] != self.j.object_map[self.f.object_map[x]]:
                return False
        for m in range(len(A)):
            if self.i.apply(self.g.apply({m: one})) != self.j.apply(self.f.apply({m: one})):
                return False
        return True


def pushout_square(base: DgPresentation, cells: Sequence[CellAttachment], leg: PresentationMorphism,
                   field=None) -> PushoutSquare:
    """The square of compiled categories behind ``pushout(base, cells, leg)``."""
    field = field if field is not None else field_from_settings()
    top = attach(base, cells)
    glued = pushout(base, cells, leg)
    A, A2, B, B2 = (compile(p, field=field) for p in (base, top, leg.target, glued))
    arrows_of = {a.name: ((1, (a.name,)),) for a in base.arrows}
    f = DgFunctor.from_morphism(PresentationMorphism(base, top, {o: o for o in base.objects}, arrows_of), A, A2)
    g = DgFunctor.from_morphism(leg, A, B)
    i = DgFunctor.from_morphism(
        PresentationMorphism(leg.target, glued, {o: o for o in leg.target.objects},
                             {a.name: ((1, (a.name,)),) for a in leg.target.arrows}), B, B2)
    objs = dict(leg.objects)
    objs.update({c.name: c.name for c in cells if c.kind == 'object'})
    arrows = dict(leg.arrows)
    arrows.update({c.name: ((1, (c.name,)),) for c in cells if c.kind != 'object'})
    j = DgFunctor.from_morphism(PresentationMorphism(top, glued, objs, arrows), A2, B2)
    return PushoutSquare(f, g, i, j)


def _bar_images(F: DgFunctor, R: FreeBimodule, middle: FreeBimodule, tag: str, scale: int) -> Dict:
    """Generators of Bar(A), pushed along F into the ``tag`` summand of ``middle``."""
    B, C = F.target, middle.category
    one = F.source.field.one
    images = {}
    for gen in R.generators:
        x, word = gen.key
        chains: Dict = {}
        if not word:
            chains[(F.object_map[x], ())] = one
        else:
            partial = [((), one)]
            for a in word:
                partial = [(letters + (m,), c * v) for letters, c in partial
                           for m, v in F.apply({a: one}).items() if not B.is_identity(m)]
            for letters, c in partial:
                _accumulate(chains, (B.src(letters[0]), letters), c)
        out: Dict = {}
        for key, c in chains.items():
            h = middle.gen.get((tag, key))
            if h is None:
                raise IntegrityError(f"bar chain {key!r} is missing from the target resolution")
            _accumulate(out, (C.identity(h.left), (tag, key), C.identity(h.right)), scale * c)
        images[gen.key] = out
    return images


def _direct_sum(parts: Sequence[Tuple[str, FreeBimodule]], name: str) -> FreeBimodule:
    gens, D, aug = [], {}, {}
    for tag, R in parts:
        for g in R.generators:
            gens.append(Generator((tag, g.key), g.left, g.right, g.level, g.shift, g.weight))
        for key, terms in R.D.items():
            D[(tag, key)] = [(c, a, (tag, h), b) for c, a, h, b in terms]
        for key, img in R.augmentation.items():
            aug[(tag, key)] = img
    return FreeBimodule(parts[0][1].category, gens, D, name=name, augmentation=aug)


@track_performance
def verify_bimodule_pushout(square: PushoutSquare, window: Tuple[int, int] = None) -> QuasiIsoCertificate:
    """
    Certify that H_!A → I_!B ⊕ J_!A′ → B′ is a pushout of B′-bimodules,
    H = i g = j f, by showing its total complex is acyclic piece by piece.

    The bimodules are modelled by induced bar resolutions. The total
    complex is the cone of cone(i_! ⊕ −j_!) → B′; a square that does not
    commute fails outright.
    """
    A, A2, B, B2 = square.f.source, square.f.target, square.g.target, square.i.target
    for C in (A, A2, B, B2):
        if not C.nilpotent_radical:
            raise RefusalError("verify_bimodule_pushout", f"{C.name} is not finite")
    if not square.commutes():
        logger.warning("Pushout square does not commute", base=A.name)
        return QuasiIsoCertificate(False, {}, {}, (0, 0), notes=["the square does not commute"])
    RA, RB, RA2 = (bar_resolution(C, degree_window=window) for C in (A, B, A2))
    one = A.field.one
    H = DgFunctor(A, B2, {x: square.i.object_map[square.g.object_map[x]] for x in A.objects},
                  {m: square.i.apply(square.g.apply({m: one})) for m in range(len(A))})
    corner = induce(RA, H, name=f"H_!Bar({A.name})")
    middle = _direct_sum([('B', induce(RB, square.i)), ('A', induce(RA2, square.j))], name="I_!B⊕J_!A′")
    images = _bar_images(square.g, RA, middle, 'B', 1)
    for key, img in _bar_images(square.f, RA, middle, 'A', -1).items():
        for lbl, c in img.items():
            _accumulate(images.setdefault(key, {}), lbl, c)
    total = free_cone(FreeMap(corner, middle, images))
    to_diagonal = FreeMap(total, DiagonalBimodule(B2), middle.augmentation)
    truncated = any(R.truncated_below for R in (RA, RB, RA2))
    cones = {f"{u},{v}": cone(to_diagonal.piece(u, v)) for u in B2.objects for v in B2.objects}
    cert = _certificate(cones, truncated)
    logger.info("Bimodule pushout verified", base=A.name, result=B2.name, verdict=cert.verdict)
    return cert


# ---------------------------------------------------------------------------
# cospans

@dataclass
class CospanData:
    """
    A cospan of boundary points A → X ← A′ with a relative class.

    ``functor`` is defined on the points ``left + right``; ``witnesses``
    keeps the chains used when this cospan was obtained by composition.
    """

    left: Tuple[str, ...]
    right: Tuple[str, ...]
    functor: FunctorData
    relative_class: RelativeClass
    dimension: int = 1
    verified: Optional[bool] = None
    witnesses: List[Chain] = dc_field(default_factory=list)

    def __post_init__(self):
        self.left, self.right = tuple(self.left), tuple(self.right)
        points = self.left + self.right
        if len(set(points)) != len(points):
            raise RefusalError("cospan", "boundary points must be distinct")
        if set(points) != set(self.functor.source_objects):
            raise RefusalError("cospan", "the boundary points must be the source objects of the functor")

    @property
    def left_presentation(self) -> DgPresentation:
        return coproduct([point(x) for x in self.left])

    @property
    def right_presentation(self) -> DgPresentation:
        return coproduct([point(x) for x in self.right])

    def coefficients(self, order: int = 0) -> Dict[str, object]:
        """The class on the boundary, point by point, at the given u-order."""
        chains = self.relative_class.source.coefficients
        chain = chains[order] if order < len(chains) else {}
        return _point_coefficients(self.functor.source, chain)

    def verify(self) -> CyReport:
        report = check_relative_left_cy(self.functor, self.relative_class, self.dimension)
        self.verified = report.verdict
        return report


def _point_coefficients(source: FiniteDgCategory, chain: Mapping) -> Dict[str, object]:
    out = {}
    for (m, (x, word)), c in chain.items():
        if word or not source.is_identity(m):
            raise RefusalError("cospan", "classes over boundary points are sums of units")
        if c:
            out[x] = c
    return out


def _point_chain(source: FiniteDgCategory, coefficients: Mapping[str, object]) -> Chain:
    return {(source.identity(x), (x, ())): c for x, c in coefficients.items() if c}


def _boundary_class(functor: FunctorData, degree: int, per_order: Sequence[Mapping[str, object]],
                    bounding: Sequence[Chain], closed: bool = True) -> RelativeClass:
    src = functor.source
    alphas = [_point_chain(src, c) for c in per_order] or [{}]
    return RelativeClass(degree, NegativeCyclicClass(degree - 1, alphas, None, closed), list(bounding))




def disk_cospan(n: int, split: int, scale=1, field=None, koszul: bool = False,
                labels: Sequence[str] = None) -> CospanData:
    """
    The A_n disk with points 0..split−1 on the left and the rest on the right.

    With ``koszul`` the apex is E_n instead of A_n; ``labels`` renames the
    n+1 points in cyclic order.
    """
    if not 0 <= split <= n + 1:
        raise RefusalError("disk_cospan", f"split must lie between 0 and {n + 1}")
    f = koszul_functor(n, field, labels) if koszul else standard_functor(n, field, labels)
    points = f.source_objects
    return CospanData(tuple(points[:split]), tuple(points[split:]), f, canonical_relative_class(f, scale))


def cap_cospan(ends: Sequence[Tuple[str, str, str]], winding: Mapping[str, int] = None, scale=1,
               field=None) -> CospanData:
    """
    One apex object per loop. For (loop, a, b) the point a goes to the loop
    object shifted by 2p+1 and b to it unshifted, p the winding of the loop.

    Every point carries −scale, so the cap composes with a cospan whose right
    boundary carries ``scale``. The shift is odd, which makes the traces
    cancel and the bounding chain zero.
    """
    field = field if field is not None else field_from_settings()
    winding = dict(winding or {})
    loops = [loop for loop, _, _ in ends]
    if len(set(loops)) != len(loops):
        raise RefusalError("cap_cospan", "every loop is capped once")
    points = [h for _, a, b in ends for h in (a, b)]
    S = compile(coproduct([point(loop) for loop in loops]), field=field)
    source = compile(coproduct([point(h) for h in points]), field=field)
    images = {}
    for loop, a, b in ends:
        images[a] = PerfectModule(S, [(loop, 2 * winding.get(loop, 0) + 1)], name=f"{loop}[{a}]")
        images[b] = PerfectModule(S, [(loop, 0)], name=f"{loop}[{b}]")
    f = FunctorData(source, S, images, name=f"cap({','.join(loops)})")
    s = field.coerce(scale)
    return CospanData(tuple(points), (), f, _boundary_class(f, 1, [{h: -s for h in points}], [{}]))


def identity_cospan(points: Sequence[str], shift: int = 0, scale=1, field=None) -> CospanData:
    """
    A ⨿ A → A on boundary points; right copies are primed. The left copy
    carries −scale and the right copy +scale, so both boundary classes are
    ``scale``.
    """
    field = field if field is not None else field_from_settings()
    points = list(points)
    right = [f"{x}'" for x in points]
    S = compile(coproduct([point(x) for x in points]), field=field)
    source = compile(coproduct([point(x) for x in points + right]), field=field)
    images = {}
    for x, y in zip(points, right):
        images[x] = PerfectModule(S, [(x, shift)], name=f"in {x}")
        images[y] = PerfectModule(S, [(x, shift)], name=f"out {x}")
    f = FunctorData(source, S, images, name=f"id({','.join(points)})")
    s = field.coerce(scale)
    coefficients = {x: -s for x in points}
    coefficients.update({y: s for y in right})
    return CospanData(tuple(points), tuple(right), f, _boundary_class(f, 1, [coefficients], [{}]))


def reverse_cospan(c: CospanData) -> CospanData:
    """Swap the two boundaries; the relative class is kept, so both boundary classes change sign."""
    return CospanData(c.right, c.left, c.functor, c.relative_class, c.dimension, c.verified, list(c.witnesses))


def _monomial_map(old: FiniteDgCategory, new: FiniteDgCategory, objs: Mapping[str, str],
                  arrows: Mapping[str, str]) -> Dict[int, int]:
    out = {}
    for m in old.monomials:
        name = path_name(_rename_path(m.path, objs, arrows))
        try:
            out[m.index] = new.index(name)
        except PresentationError:
            raise IntegrityError(f"monomial {m.name} has no image after gluing") from None
    return out


def _push_chain(chain: Mapping, mono: Mapping[int, int], roots: Mapping[str, Tuple[str, int]],
                old: FiniteDgCategory = None) -> Chain:
    """
    Move a Hochschild chain along a gluing. A chain of length zero on an
    object identified with its root shifted by o picks up (−1)^o; longer
    chains must avoid oddly shifted objects.
    """
    out: Chain = {}
    for (m, (x, word)), c in chain.items():
        r, off = roots.get(x, (x, 0))
        if word:
            visited = {x} | ({old.tgt(a) for a in word} if old is not None else set())
            if any(roots.get(y, (y, 0))[1] % 2 for y in visited):
                raise RefusalError("compose_cospans", "a bounding chain crosses an oddly shifted identification")
            off = 0
        _accumulate(out, (mono[m], (r, tuple(mono[a] for a in word))), c * sign(off))
    return out


def _push_module(P: PerfectModule, S: FiniteDgCategory, mono: Mapping[int, int],
                 roots: Mapping[str, Tuple[str, int]], name: str) -> PerfectModule:
    """Summand (y, s) goes to (root, s + o) when e_y ≅ e_root[o]."""
    summands = []
    for y, s in P.summands:
        r, off = roots.get(y, (y, 0))
        summands.append((r, s + off))
    return PerfectModule(S, summands, {k: {mono[m]: c for m, c in elem.items()} for k, elem in P.twisting.items()},
                         name=name)


def _representable(c: CospanData, x: str) -> Tuple[str, int]:
    P = c.functor.images.get(x)
    if P is None or len(P.summands) != 1:
        raise RefusalError("compose_cospans", f"the image of boundary point {x!r} is not a shifted representable")
    return P.summands[0]


def _fresh_prefix(taken: Sequence[str], names: Sequence[str], prefix: str) -> str:
    return prefix if set(taken) & set(names) else ''


@dataclass
class Gluing:
    """
    The apex X ⊔_{A′} Y of two cospans before compilation.

    ``roots`` sends every object of X and every renamed object of Y to
    (root, o) with e_y ≅ e_root[o]. ``pairs`` holds the inverse pair (t, s)
    adjoined when a glued point closes a cycle, keyed by the original Y
    object; ``closing`` lists (point, t, s) for the same pairs.
    """

    presentation: DgPresentation
    roots: Dict[str, Tuple[str, int]]
    y_objects: Dict[str, str]
    y_arrows: Dict[str, str]
    pairs: Dict[str, Tuple[str, str]] = dc_field(default_factory=dict)
    closing: List[Tuple[str, str, str]] = dc_field(default_factory=list)

    def root_names(self, objects: Sequence[str], renamed: bool = False) -> Dict[str, str]:
        names = self.y_objects if renamed else {o: o for o in objects}
        return {o: self.roots[names[o]][0] for o in objects}

    def y_roots(self) -> Dict[str, Tuple[str, int]]:
        return {o: self.roots[n] for o, n in self.y_objects.items()}


def _pair_name(taken: set, stem: str) -> str:
    name = stem
    while name in taken:
        name += "'"
    taken.add(name)
    return name


def glue_apex(c1: CospanData, c2: CospanData) -> Gluing:
    """
    Identify every glued image object of ``c2`` with its partner in ``c1``
    up to shift.

    Points are glued in order. A point joining two classes merges them, the
    earlier object (objects of X first) becoming the root. A point whose
    ends already share a root r with net shift D adjoins t: r → r of degree
    D and weight 1 with an inverse s, ts = st = 1.

    Raises:
        RefusalError: the boundaries differ in size or a glued image is not
            a shifted representable
    """
    if len(c1.right) != len(c2.left):
        raise RefusalError("compose_cospans", "the glued boundaries have different sizes")
    px, py = c1.functor.target.presentation, c2.functor.target.presentation
    pre = _fresh_prefix(list(px.objects) + [a.name for a in px.arrows],
                        list(py.objects) + [a.name for a in py.arrows], 'b:')
    y_objs = {o: pre + o for o in py.objects}
    y_arrows = {a.name: pre + a.name for a in py.arrows}
    order = {o: i for i, o in enumerate(list(px.objects) + [y_objs[o] for o in py.objects])}
    parent: Dict[str, Tuple[str, int]] = {o: (o, 0) for o in order}

    def find(y: str) -> Tuple[str, int]:
        r, off = parent[y]
        if r == y:
            return y, 0
        root, more = find(r)
        parent[y] = (root, off + more)
        return parent[y]

    taken = {a.name for a in px.arrows} | set(y_arrows.values())
    new_arrows, new_relations = [], []
    pairs: Dict[str, Tuple[str, str]] = {}
    closing = []
    for x1, x2 in zip(c1.right, c2.left):
        (y1, s1), (y2, s2) = _representable(c1, x1), _representable(c2, x2)
        (r1, o1), (r2, o2) = find(y1), find(y_objs[y2])
        if r1 != r2:
            if order[r1] <= order[r2]:
                parent[r2] = (r1, o1 + s1 - s2 - o2)
            else:
                parent[r1] = (r2, o2 + s2 - s1 - o1)
            continue
        shift = o1 + s1 - o2 - s2
        t, s = _pair_name(taken, f"t_{y2}"), _pair_name(taken, f"s_{y2}")
        new_arrows += [Arrow(t, r1, r1, shift, 1), Arrow(s, r1, r1, -shift, -1)]
        e = identity_path(r1)
        new_relations += [((1, (t, s)), (-1, e)), ((1, (s, t)), (-1, e))]
        pairs[y2] = (t, s)
        closing.append((x1, t, s))

    roots = {o: find(o) for o in order}
    objs = {o: r for o, (r, _) in roots.items()}
    arrows = []
    for a in px.arrows:
        arrows.append(_shifted_arrow(a, a.name, roots))
    for a in py.arrows:
        renamed = Arrow(a.name, y_objs[a.src], y_objs[a.tgt], a.deg, a.weight)
        arrows.append(_shifted_arrow(renamed, y_arrows[a.name], roots))
    rx = relabel(px, objs, {})
    ry = relabel(relabel(py, y_objs, y_arrows), objs, {})
    diff = dict(rx.differential)
    diff.update(ry.differential)
    p = DgPresentation(tuple(dict.fromkeys(r for r, _ in roots.values())), tuple(arrows + new_arrows), diff,
                       rx.relations + ry.relations + tuple(new_relations), f"{px.name}⊔{py.name}")
    p.validate()
    logger.debug("Apex glued", apex=p.name, objects=len(p.objects), pairs=len(pairs))
    return Gluing(p, roots, y_objs, y_arrows, pairs, closing)


def _shifted_arrow(a: Arrow, name: str, roots: Mapping[str, Tuple[str, int]]) -> Arrow:
    """a: u → v of degree d becomes root(u) → root(v) of degree d + o_u − o_v."""
    (ru, ou), (rv, ov) = roots[a.src], roots[a.tgt]
    return Arrow(name, ru, rv, a.deg + ou - ov, a.weight)


def _compile_apex(g: Gluing, field, weight_window: Tuple[int, int] = None) -> FiniteDgCategory:
    """Compile finitely when possible, otherwise inside the weight window."""
    p = g.presentation
    window = tuple(weight_window) if weight_window is not None else get_settings().weight_window
    try:
        if not g.pairs:
            try:
                return compile(p, field=field)
            except CompileError:
                if all(a.weight == 0 for a in p.arrows):
                    raise
        return compile(p, weight_window=window, field=field)
    except CompileError as e:
        raise WindowError(f"the glued apex {p.name!r} does not compile: {e.reason}") from e


@track_performance
def compose_cospans(c1: CospanData, c2: CospanData, witness: Mapping = None, verify: bool = False,
                    weight_window: Tuple[int, int] = None) -> CospanData:
    """
    Glue ``c2`` after ``c1`` along c1.right ≅ c2.left, matched position by position.

    The apex is built by ``glue_apex``. The composite class is (α1|_A,
    α2|_{A″}) with bounding chain β1 + β2 − tr(w) plus c·(s⊗[t]) for every
    adjoined pair, c the class of the first cospan at the closing point.
    The witness w satisfies α1|_{A′} + α2|_{A′} + b w = 0.

    Raises:
        RefusalError: the boundaries differ in size, a glued image is not a
            shifted representable, or the witness identity fails
        WindowError: the apex does not compile, even inside the weight window
    """
    if c1.dimension != c2.dimension:
        raise RefusalError("compose_cospans", "the cospans have different dimensions")
    g = glue_apex(c1, c2)
    _check_witness(c1, c2, witness)
    f1, f2 = c1.functor, c2.functor
    X, Y = f1.target, f2.target
    field = X.field
    S = _compile_apex(g, field, weight_window)
    mono1 = _monomial_map(X, S, g.root_names(X.objects), {})
    mono2 = _monomial_map(Y, S, g.root_names(Y.objects, renamed=True), g.y_arrows)
    roots1, roots2 = g.roots, g.y_roots()

    pre = 'b:'
    right_names = {x: pre + x if x in c1.left else x for x in c2.right}
    left, right = c1.left, tuple(right_names[x] for x in c2.right)
    source = compile(coproduct([point(x) for x in left + right]), field=field)
    images = {}
    for x in left:
        if x in f1.images:
            images[x] = _push_module(f1.images[x], S, mono1, roots1, f"image of {x}")
    for x in c2.right:
        if x in f2.images:
            images[right_names[x]] = _push_module(f2.images[x], S, mono2, roots2, f"image of {right_names[x]}")
    f = FunctorData(source, S, images, name=f"{f1.name}∘{f2.name}")

    r1, r2 = c1.relative_class, c2.relative_class
    orders = max(1, len(r1.source.coefficients), len(r2.source.coefficients), len(r1.bounding), len(r2.bounding))
    per_order, bounding = [], []
    for j in range(orders):
        a1, a2 = c1.coefficients(j), c2.coefficients(j)
        coefficients = {x: a1[x] for x in left if x in a1}
        coefficients.update({right_names[x]: a2[x] for x in c2.right if x in a2})
        per_order.append(coefficients)
        beta: Chain = {}
        for chain, mono, roots, old in ((_order(r1.bounding, j), mono1, roots1, X),
                                        (_order(r2.bounding, j), mono2, roots2, Y)):
            for lbl, c in _push_chain(chain, mono, roots, old).items():
                _accumulate(beta, lbl, c)
        bounding.append(beta)
    if witness:
        for lbl, c in _witness_trace(c1, witness, S, roots1).items():
            _accumulate(bounding[0], lbl, -c)
    a1 = c1.coefficients(0)
    for x1, t, s in g.closing:
        y1, s1 = _representable(c1, x1)
        c = a1.get(x1, field.zero) * sign(s1 + roots1[y1][1])
        r = roots1[y1][0]
        _accumulate(bounding[0], (S.index(s), (r, (S.index(t),))), c)
    closed = r1.source.closed and r2.source.closed
    rel = _boundary_class(f, r1.degree, per_order, bounding, closed)
    out = CospanData(left, right, f, rel, c1.dimension, witnesses=[dict(witness or {})])
    logger.info("Cospans composed", first=f1.name, second=f2.name, apex=S.name, pairs=len(g.pairs))
    if verify:
        out.verify()
    return out


def _order(chains: Sequence[Chain], j: int) -> Chain:
    return chains[j] if j < len(chains) else {}


def _check_witness(c1: CospanData, c2: CospanData, witness: Optional[Mapping]) -> None:
    """α1|_{A′} + α2|_{A′} + b w = 0 order by order, with w entering at order 0."""
    orders = max(len(c1.relative_class.source.coefficients), len(c2.relative_class.source.coefficients))
    degree = c1.relative_class.degree - 1
    field = c1.functor.source.field
    for j in range(orders):
        a1, a2 = c1.coefficients(j), c2.coefficients(j)
        total = {}
        for x1, x2 in zip(c1.right, c2.left):
            v = a1.get(x1, field.zero) + a2.get(x2, field.zero)
            if v:
                total[x1] = v
        if j == 0 and witness:
            A = compile(c1.right_presentation, field=field)
            mc = mixed_complex(A)
            k, vec = mc.to_vector(witness)
            alpha_k, alpha_vec = mc.to_vector(_point_chain(A, total))
            bw = mc.apply_b(k, vec) if k is not None else {}
            combined = dict(bw)
            for i, v in alpha_vec.items():
                _accumulate(combined, i, v)
            if combined:
                raise MismatchError("compose_cospans", f"the witness does not match the boundary classes in degree {degree}")
        elif total:
            raise MismatchError("compose_cospans",
                               f"the boundary classes do not match in degree {degree + 2 * j}")


def _witness_trace(c1: CospanData, witness: Mapping, S: FiniteDgCategory,
                   roots: Mapping[str, Tuple[str, int]]) -> Chain:
    f = c1.functor
    out: Chain = {}
    for (m, (x, word)), c in witness.items():
        if word:
            raise RefusalError("compose_cospans", "witness chains over points carry no words")
        for y, s in f.summands(x):
            r, off = roots.get(y, (y, 0))
            _accumulate(out, (S.identity(r), (r, ())), c * sign(s + off))
    return out



# ---------------------------------------------------------------------------
# localization

@dataclass
class LocalizationResult:
    """A Drinfeld quotient with its induced class and hom homology when computable."""

    presentation: DgPresentation
    category: Optional[FiniteDgCategory]
    negative_cyclic: Optional[NegativeCyclicClass]
    homology: Dict[Tuple[str, str], HomologyDims] = dc_field(default_factory=dict)
    notes: List[str] = dc_field(default_factory=list)

    @property
    def no_homology(self) -> bool:
        return self.category is None

    @property
    def is_zero(self) -> bool:
        return self.category is not None and not any(any(h.values()) for h in self.homology.values())


def hom_homology(C: FiniteDgCategory) -> Dict[Tuple[str, str], HomologyDims]:
    """Cohomology of every Hom complex, nonzero pairs only."""
    out = {}
    for x in C.objects:
        for y in C.objects:
            basis = C.hom(x, y)
            if not basis:
                continue
            h = homology_dims(complex_from_basis(basis, C.degree, lambda m: C.d(m), C.field))
            if any(h.values()):
                out[(x, y)] = HomologyDims({k: v for k, v in h.items() if v})
    return out


def _contraction_name(p: DgPresentation, y: str) -> str:
    name = f"h_{y}"
    taken = {a.name for a in p.arrows}
    while name in taken:
        name += "'"
    return name


@track_performance
def localize(c: CospanData, points: Sequence[str] = None, window: Tuple[int, int] = None) -> LocalizationResult:
    """
    Kill the images of boundary points: adjoin h_y: y → y of degree −1 with
    d h_y = 1 for every image object y (and h_y² = 0 when End(y) = k).

    With ``points`` omitted the right boundary must be empty and the whole
    left boundary is contracted. When every point carrying the class is
    contracted, β + Σ t_y h_y is an absolute class on the quotient.
    """
    if points is None:
        if c.right:
            raise RefusalError("localize", "the right boundary must be empty")
        points = c.left
    f, S = c.functor, c.functor.target
    p = S.presentation
    notes: List[str] = []
    alpha = c.coefficients(0)
    traces: Dict[str, object] = {}
    contractions: Dict[str, str] = {}
    arrows, diff, relations = list(p.arrows), dict(p.differential), list(p.relations)
    for x in points:
        if x not in f.source_objects:
            raise RefusalError("localize", f"{x!r} is not a boundary point")
        P = f.images.get(x)
        if P is None:
            continue
        if len(P.summands) != 1:
            raise RefusalError("localize", f"the image of {x!r} is not a shifted representable")
        y, s = P.summands[0]
        if x in alpha:
            _accumulate(traces, y, alpha[x] * sign(s))
        if y in contractions:
            continue
        h = _contraction_name(DgPresentation(p.objects, tuple(arrows)), y)
        contractions[y] = h
        arrows.append(Arrow(h, y, y, -1, 0))
        diff[h] = ((1, identity_path(y)),)
        if len(S.hom(y, y)) == 1:
            relations.append(((1, (h, h)),))
        else:
            notes.append(f"End({y}) is not one-dimensional; the contraction of {y} is left free")
    q = DgPresentation(p.objects, tuple(arrows), diff, tuple(relations), f"{p.name}/{len(contractions)}")
    q.validate()
    try:
        Q = compile(q, field=S.field)
    except CompileError as e:
        logger.warning("Quotient is not windowable", presentation=q.name, error=str(e))
        return LocalizationResult(q, None, None, notes=notes + ["no-homology: the quotient does not compile"])

    homology = hom_homology(Q)
    carrying = {x for x in f.source_objects for j in range(len(c.relative_class.source.coefficients))
                if x in c.coefficients(j)}
    if carrying - set(points):
        notes.append("boundary points outside the contraction carry the class; no absolute class")
        return LocalizationResult(q, Q, None, homology, notes)
    mono = _monomial_map(S, Q, {}, {})
    beta = _push_chain(_order(c.relative_class.bounding, 0), mono, {})
    mc = mixed_complex(Q, window)
    for y, t in traces.items():
        if not t:
            continue
        lbl = (Q.index(contractions[y]), (y, ()))
        k, vec = mc.to_vector({lbl: 1})
        unit_k, unit = mc.index[(Q.identity(y), (y, ()))]
        c_y = mc.apply_b(k, vec).get(unit, Q.field.zero) if unit_k == k + 1 else Q.field.zero
        if c_y not in (Q.field.one, -Q.field.one):
            raise IntegrityError(f"b(h_{y}) is not ±1_{y}")
        _accumulate(beta, lbl, t * c_y)
    z = HochschildClass(c.relative_class.degree, beta)
    k, vec = mc.to_vector(beta)
    if k is not None and mc.apply_b(k, vec):
        raise IntegrityError("the induced chain on the quotient is not a b-cycle")
    try:
        lifted = lift_to_negative_cyclic(mc, z, max_order=get_settings().u_order)
    except ObstructionError as e:
        notes.append(f"negative cyclic lift obstructed: {e}")
        lifted = NegativeCyclicClass(z.degree, [beta], 1, False)
    logger.info("Localized", presentation=q.name, contracted=sorted(contractions), zero=not homology)
    return LocalizationResult(q, Q, lifted, homology, notes)


# ---------------------------------------------------------------------------
# JSON

def cospan_to_json(c: CospanData) -> dict:
    f = c.functor
    return {
        'schema': 1,
        'left': list(c.left),
        'right': list(c.right),
        'dimension': c.dimension,
        'functor': functor_to_json(f),
        'class': relative_class_to_json(f, c.relative_class),
        'witnesses': [chain_to_json(compile(c.right_presentation, field=f.source.field), w)
                      for w in c.witnesses if w],
    }


def cospan_from_json(doc, path: str = '$', field=None) -> CospanData:
    """Parse a schema-1 cospan bundle; unknown keys are rejected."""
    _check_keys(doc, {'schema', 'left', 'right', 'dimension', 'functor', 'class', 'witnesses'}, path,
                ('schema', 'left', 'right', 'functor', 'class'))
    if doc['schema'] != 1:
        raise SchemaError(f"{path}.schema", f"unsupported schema {doc['schema']!r}")
    for side in ('left', 'right'):
        if not isinstance(doc[side], list):
            raise SchemaError(f"{path}.{side}", "expected a list of point labels")
    dimension = doc.get('dimension', 1)
    if not isinstance(dimension, int):
        raise SchemaError(f"{path}.dimension", "expected an integer")
    f = functor_from_json(doc['functor'], f"{path}.functor", field)
    rel = relative_class_from_json(f, doc['class'], f"{path}.class")
    right = tuple(str(x) for x in doc['right'])
    boundary = compile(coproduct([point(x) for x in right]), field=f.source.field)
    witnesses = [chain_from_json(boundary, w, f"{path}.witnesses[{i}]")
                 for i, w in enumerate(doc.get('witnesses', []))]
    return CospanData(tuple(str(x) for x in doc['left']), right, f, rel, dimension, witnesses=witnesses)
