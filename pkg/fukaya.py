"""
Topological Fukaya categories of framed marked surfaces.

A surface is given by a one-vertex spanning ribbon graph: m half-edges in
cyclic order around the vertex, some of them paired into loops that carry a
winding number. The vertex is a disk cospan with boundary modules L_0, …,
L_{m−1}, one per half-edge in cyclic order, and every loop is a cap cospan
gluing the boundary objects of its two half-edges. The state sum is their
composite, so its class comes out of cospan composition.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from typing import Dict, List, Optional, Sequence, Tuple, Union

from bimodules import periodic_resolution
from cyduality import CyReport, check_left_cy
from cykit_config import get_settings
from dgcore import Arrow, DgPresentation, FiniteDgCategory, _check_keys, identity_path, relabel
from errors import RefusalError, SchemaError, WindowError
from exactla import field_from_settings
from glue import CospanData, Gluing, cap_cospan, compose_cospans, disk_cospan, glue_apex
from hochschild import NegativeCyclicClass, RelativeClass
from monitoring import logger, track_performance
from relcy import FunctorData, check_relative_left_cy

SURFACES = ('disk', 'annulus', 'sphere', 'torus', 'custom')


@dataclass
class FramedRibbonGraph:
    """
    A single vertex with cyclically ordered half-edges.

    ``loops`` pairs half-edges, ``winding`` gives every loop its integer p
    (0 when absent). Unpaired half-edges are external.
    """

    half_edges: Tuple[str, ...]
    loops: Dict[str, Tuple[str, str]] = dc_field(default_factory=dict)
    winding: Dict[str, int] = dc_field(default_factory=dict)
    name: str = 'graph'

    def __post_init__(self):
        self.half_edges = tuple(str(h) for h in self.half_edges)
        self.loops = {str(k): (str(a), str(b)) for k, (a, b) in dict(self.loops).items()}
        unknown = set(self.winding) - set(self.loops)
        if unknown:
            raise RefusalError("ribbon graph", f"winding given for unknown loops {sorted(unknown)}")
        self.winding = {k: int(self.winding.get(k, 0)) for k in self.loops}
        if len(self.half_edges) < 2:
            raise RefusalError("ribbon graph", "the vertex needs at least two half-edges")
        if len(set(self.half_edges)) != len(self.half_edges):
            raise RefusalError("ribbon graph", "half-edge labels must be distinct")
        seen = set()
        for loop, ends in self.loops.items():
            for h in ends:
                if h not in self.half_edges:
                    raise RefusalError("ribbon graph", f"loop {loop!r} names unknown half-edge {h!r}")
                if h in seen:
                    raise RefusalError("ribbon graph", f"half-edge {h!r} is paired twice")
                seen.add(h)

    @property
    def paired(self) -> Tuple[str, ...]:
        ends = {h for pair in self.loops.values() for h in pair}
        return tuple(h for h in self.half_edges if h in ends)

    @property
    def external(self) -> Tuple[str, ...]:
        ends = set(self.paired)
        return tuple(h for h in self.half_edges if h not in ends)

    def position(self, h: str) -> int:
        return self.half_edges.index(h)


def rotate(g: FramedRibbonGraph, k: int = 1) -> FramedRibbonGraph:
    """Start the cyclic order k half-edges later."""
    k %= len(g.half_edges)
    return FramedRibbonGraph(g.half_edges[k:] + g.half_edges[:k], dict(g.loops), dict(g.winding),
                             f"{g.name}@{k}")


@dataclass(frozen=True)
class SurfaceSpec:
    """A catalog surface: marks per boundary component (points for the sphere) and loop windings."""

    name: str
    marks: Tuple[int, ...] = ()
    winding: Tuple[int, ...] = ()


def _windings(spec: SurfaceSpec, count: int) -> List[int]:
    w = list(spec.winding) or [0] * count
    if len(w) != count:
        raise RefusalError("builtin_surface", f"{spec.name} takes {count} winding number(s), got {len(w)}")
    return w


def builtin_surface(spec: SurfaceSpec) -> FramedRibbonGraph:
    """
    Standard one-vertex spanning graph of a catalog surface.

    Raises:
        RefusalError: unknown surface or marks the catalog does not cover
    """
    if spec.name not in SURFACES:
        raise RefusalError("builtin_surface", f"unknown surface {spec.name!r}")
    if spec.name == 'custom':
        raise RefusalError("builtin_surface", "custom surfaces are read from a graph file")

    if spec.name == 'disk':
        marks = spec.marks or (3,)
        if len(marks) != 1 or marks[0] < 2:
            raise RefusalError("builtin_surface", "a disk has one boundary component with at least two marks")
        if spec.winding:
            raise RefusalError("builtin_surface", "a disk has no loops to wind")
        return FramedRibbonGraph(tuple(str(i) for i in range(marks[0])), name=f"disk{marks[0]}")

    if spec.name == 'sphere':
        if sum(spec.marks or (2,)) != 2:
            raise RefusalError("builtin_surface", "only the sphere with two marked points is catalogued")
        p, = _windings(spec, 1)
        return FramedRibbonGraph(('a', 'b'), {'l': ('a', 'b')}, {'l': p}, name=f"sphere(p={p})")

    if spec.name == 'annulus':
        marks = spec.marks or (1, 1)
        if len(marks) != 2 or min(marks) < 1:
            raise RefusalError("builtin_surface", "an annulus has two boundary components, each marked")
        p, = _windings(spec, 1)
        half_edges = ([f"x{i}" for i in range(marks[0])] + ['l+']
                      + [f"y{i}" for i in range(marks[1])] + ['l-'])
        return FramedRibbonGraph(tuple(half_edges), {'l': ('l+', 'l-')}, {'l': p}, name=f"annulus(p={p})")

    if tuple(spec.marks or (1,)) != (1,):
        raise RefusalError("builtin_surface", "only the torus with one marked point is catalogued")
    p, q = _windings(spec, 2)
    return FramedRibbonGraph(('a+', 'b+', 'a-', 'b-'), {'a': ('a+', 'a-'), 'b': ('b+', 'b-')},
                             {'a': p, 'b': q}, name="torus")


# ---------------------------------------------------------------------------
# state sum

@dataclass
class StateSum:
    """
    The glued category of a graph with its boundary functor.

    ``loop_arrows`` maps each loop whose gluing closed a cycle to its (t, s)
    arrow names; other loops identify distinct objects up to shift.
    ``cospan`` is the composite of the vertex with the caps.
    """

    graph: FramedRibbonGraph
    vertex: FunctorData
    presentation: DgPresentation
    category: FiniteDgCategory
    boundary: Optional[FunctorData]
    loop_arrows: Dict[str, Tuple[str, str]] = dc_field(default_factory=dict)
    cospan: Optional[CospanData] = None
    weight_window: Optional[Tuple[int, int]] = None


def working_order(g: FramedRibbonGraph) -> FramedRibbonGraph:
    """``g`` rotated to start at its first external half-edge, unchanged when closed."""
    if not g.external or g.position(g.external[0]) == 0:
        return g
    return rotate(g, g.position(g.external[0]))


def loop_ends(g: FramedRibbonGraph) -> List[Tuple[str, str, str]]:
    """(loop, earlier, later) per loop, by position in the cyclic order."""
    return [(loop,) + tuple(sorted(ends, key=g.position)) for loop, ends in g.loops.items()]


def vertex_cospan(g: FramedRibbonGraph, scale=1, field=None) -> CospanData:
    """
    The vertex of ``g`` as a cospan: external half-edges on the left, paired
    ones on the right in the order of ``loop_ends``.

    A graph with loops and an external half-edge uses E_{m−1}, whose boundary
    images away from position 0 are all representables; otherwise A_{m−1}.
    """
    h = working_order(g)
    koszul = bool(h.loops) and bool(h.external)
    c = disk_cospan(len(h.half_edges) - 1, len(h.half_edges), scale, field, koszul=koszul, labels=h.half_edges)
    paired = tuple(x for _, a, b in loop_ends(h) for x in (a, b))
    return CospanData(h.external, paired, c.functor, c.relative_class)


def surface_cospan(g: FramedRibbonGraph, scale=1, weight_window: Tuple[int, int] = None,
                   field=None) -> CospanData:
    """
    The boundary functor of ``g`` with its class: the vertex cospan composed
    with one cap per loop, or the vertex alone when there are no loops.

    Raises:
        RefusalError: a paired half-edge sits where its boundary image is a
            twisted complex
        WindowError: the glued category does not compile
    """
    field = field if field is not None else field_from_settings()
    vertex = vertex_cospan(g, scale, field)
    if not g.loops:
        return vertex
    cap = cap_cospan(loop_ends(working_order(g)), g.winding, scale, field)
    return compose_cospans(vertex, cap, weight_window=weight_window)


def _anchor(vertex: FunctorData, x: str) -> str:
    """The object carrying the unshifted summand of L_x, or its only summand."""
    summands = vertex.summands(x)
    for y, s in summands:
        if s == 0:
            return y
    return summands[0][0]


def _find(merge: Dict[str, str], x: str) -> str:
    while merge.get(x, x) != x:
        x = merge[x]
    return x


def _anchored_presentation(g: FramedRibbonGraph, vertex: FunctorData
                           ) -> Tuple[DgPresentation, Dict[str, str], Dict[str, Tuple[str, str]]]:
    """
    Glue along the anchors of the boundary modules: p = 0 loops between
    distinct objects identify them, the rest adjoin a degree-2p inverse pair.
    Used when the glued images are not all representables.
    """
    p = vertex.target.presentation
    merge: Dict[str, str] = {}
    ends: Dict[str, Tuple[str, str]] = {}
    for loop, (a, b) in g.loops.items():
        ya = _find(merge, _anchor(vertex, a))
        yb = _find(merge, _anchor(vertex, b))
        if g.winding[loop] == 0 and ya != yb:
            merge[yb] = ya
        else:
            ends[loop] = (ya, yb)
    objs = {o: _find(merge, o) for o in p.objects}
    base = relabel(p, objs, {})
    arrows, relations = list(base.arrows), list(base.relations)
    pairs: Dict[str, Tuple[str, str]] = {}
    for loop, (ya, yb) in ends.items():
        ya, yb = _find(merge, ya), _find(merge, yb)
        t, s = f"t_{loop}", f"s_{loop}"
        k = 2 * g.winding[loop]
        arrows += [Arrow(t, ya, yb, k, 1), Arrow(s, yb, ya, -k, -1)]
        relations += [((1, (t, s)), (-1, identity_path(ya))), ((1, (s, t)), (-1, identity_path(yb)))]
        pairs[loop] = (t, s)
    q = DgPresentation(tuple(dict.fromkeys(objs[o] for o in p.objects)), tuple(arrows), base.differential,
                       tuple(relations), g.name)
    q.validate()
    return q, objs, pairs


def _gluing(g: FramedRibbonGraph, field=None) -> Tuple[CospanData, Optional[Gluing]]:
    vertex = vertex_cospan(g, 1, field)
    if not g.loops:
        return vertex, None
    try:
        return vertex, glue_apex(vertex, cap_cospan(loop_ends(working_order(g)), g.winding, 1, field))
    except RefusalError:
        return vertex, None


def state_sum_presentation(g: FramedRibbonGraph
                           ) -> Tuple[DgPresentation, Dict[str, str], Dict[str, Tuple[str, str]]]:
    """
    The vertex presentation with the loops of ``g`` glued in.

    Returns the presentation, the vertex objects' images and the inverse
    pairs per loop. Graphs whose loops end on twisted complexes fall back to
    gluing along anchors, which only serves to emit the presentation.
    Compilation is left to the caller.
    """
    vertex, gl = _gluing(g)
    if gl is not None:
        return gl.presentation, gl.root_names(vertex.functor.target.objects), dict(gl.pairs)
    if not g.loops:
        S = vertex.functor.target
        return S.presentation, {o: o for o in S.objects}, {}
    return _anchored_presentation(g, vertex.functor)


@track_performance
def state_sum(g: FramedRibbonGraph, weight_window: Tuple[int, int] = None, field=None) -> StateSum:
    """
    Glue the loops of ``g`` by composing cospans and keep the external
    boundary functor.

    Raises:
        WindowError: the glued category is neither finite nor weight-periodic,
            or a loop ends on a boundary image that is not a representable
    """
    field = field if field is not None else field_from_settings()
    vertex, gl = _gluing(g, field)
    if g.loops and gl is None:
        raise WindowError(f"the loops of {g.name!r} end on twisted complexes; only the presentation is emitted")
    c = surface_cospan(g, 1, weight_window, field)
    Q = c.functor.target
    boundary = c.functor if g.external else None
    pairs = dict(gl.pairs) if gl is not None else {}
    logger.info("State sum built", graph=g.name, objects=len(Q.objects), basis=len(Q),
                loops=len(g.loops), glued_pairs=len(pairs))
    return StateSum(g, vertex.functor, Q.presentation, Q, boundary, pairs, c, weight_window)


def hom_table(C: FiniteDgCategory) -> Dict[Tuple[str, str], List[int]]:
    """Sorted monomial degrees of every nonzero Hom space."""
    return {(x, y): sorted(C.degree(m) for m in C.hom(x, y))
            for x in C.objects for y in C.objects if C.hom(x, y)}


# ---------------------------------------------------------------------------
# Calabi-Yau structure

def _on_arrow_resolution(Q: FiniteDgCategory, R, chain) -> dict:
    """Rewrite m⊗[a] for arrows a as m⊗g_a on the arrow resolution."""
    out = {}
    for (m, (x, word)), c in chain.items():
        names = [Q.monomials[i].name for i in word]
        if len(names) != 1 or ('arr', names[0]) not in R.gen:
            raise WindowError("the class of this closed surface has no image on the arrow resolution")
        out[(m, ('arr', names[0]))] = c
    return out


def boundary_cy_candidate(g: Union[FramedRibbonGraph, StateSum], scale=1,
                          weight_window: Tuple[int, int] = None) -> RelativeClass:
    """
    The class of dimension 1 on the boundary functor of the state sum.

    It is the class of the composite of the vertex cospan, carrying the
    canonical class with coefficient ``scale``, with the caps of the loops.
    Without loops this is the canonical relative class; a loop closing a
    cycle contributes scale·s⊗[t] to the bounding chain.

    Raises:
        WindowError: the loops end on twisted complexes or the glued
            category does not compile
    """
    ss = g if isinstance(g, StateSum) else state_sum(g, weight_window)
    if ss.boundary is None and not ss.loop_arrows:
        raise RefusalError("boundary_cy_candidate", "the surface has neither boundary nor loops")
    c = surface_cospan(ss.graph, scale, ss.weight_window, ss.category.field)
    return c.relative_class


@track_performance
def check_surface(g: Union[FramedRibbonGraph, StateSum], scale=1,
                  weight_window: Tuple[int, int] = None) -> CyReport:
    """Relative check on the boundary functor, or the absolute check for a closed surface."""
    ss = g if isinstance(g, StateSum) else state_sum(g, weight_window)
    c = surface_cospan(ss.graph, scale, ss.weight_window, ss.category.field)
    if ss.boundary is not None:
        report = check_relative_left_cy(c.functor, c.relative_class, 1)
    else:
        Q = c.functor.target
        if not Q.weight_periodic:
            raise WindowError("no finite resolution is known for this closed surface; the check is inconclusive")
        R = periodic_resolution(Q)
        chain = _on_arrow_resolution(Q, R, c.relative_class.bounding[0])
        report = check_left_cy(Q, NegativeCyclicClass(1, [chain], None, True), 1, R)
    logger.info("Surface checked", graph=ss.graph.name, verdict=report.verdict)
    return report


def check_surfaces(graphs: Sequence[FramedRibbonGraph], scale=1) -> List[CyReport]:
    """Check independent surfaces, CYKIT_THREADS at a time."""
    threads = get_settings().threads
    if threads > 1 and len(graphs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda g: check_surface(g, scale), graphs))
    return [check_surface(g, scale) for g in graphs]


# ---------------------------------------------------------------------------
# JSON

def graph_to_json(g: FramedRibbonGraph) -> dict:
    return {
        'schema': 1,
        'name': g.name,
        'half_edges': list(g.half_edges),
        'loops': [{'name': k, 'half_edges': list(v), 'winding': g.winding[k]} for k, v in g.loops.items()],
    }


def graph_from_json(doc, path: str = '$') -> FramedRibbonGraph:
    """Parse a schema-1 ribbon graph; unknown keys are rejected."""
    _check_keys(doc, {'schema', 'name', 'half_edges', 'loops'}, path, ('schema', 'half_edges'))
    if doc['schema'] != 1:
        raise SchemaError(f"{path}.schema", f"unsupported schema {doc['schema']!r}")
    if not isinstance(doc['half_edges'], list):
        raise SchemaError(f"{path}.half_edges", "expected a list of half-edge labels")
    loops, winding = {}, {}
    for i, loop in enumerate(doc.get('loops', [])):
        where = f"{path}.loops[{i}]"
        _check_keys(loop, {'name', 'half_edges', 'winding'}, where, ('name', 'half_edges'))
        ends = loop['half_edges']
        if not isinstance(ends, list) or len(ends) != 2:
            raise SchemaError(f"{where}.half_edges", "expected two half-edge labels")
        w = loop.get('winding', 0)
        if not isinstance(w, int) or isinstance(w, bool):
            raise SchemaError(f"{where}.winding", "expected an integer")
        name = str(loop['name'])
        if name in loops:
            raise SchemaError(f"{where}.name", f"duplicate loop {name!r}")
        loops[name], winding[name] = (str(ends[0]), str(ends[1])), w
    try:
        return FramedRibbonGraph(tuple(str(h) for h in doc['half_edges']), loops, winding,
                                 str(doc.get('name', 'graph')))
    except RefusalError as e:
        raise SchemaError(path, e.reason) from e
