"""
Hochschild, cyclic and negative cyclic chains.

The Hochschild complex of a compiled category is the normalized complex
Bar(C) ⊗_{C^e} C with the b differential; Connes' B acts on the same basis
of words m[a1|…|ap]. Negative cyclic homology is computed on u-adic
truncations of (C[[u]], b + uB) and reported only in degrees where two
consecutive truncation orders agree.

Degrees of HH are reported homologically (HH_n lives at cohomological
degree −n); HC⁻ is reported cohomologically with |u| = +2.
"""

from dataclasses import dataclass, field as dc_field
from typing import Dict, FrozenSet, Hashable, List, Mapping, Optional, Sequence, Tuple

from bimodules import (
    arrow_resolution, bar_resolution, chain_map_from_labels, label_index, periodic_resolution, sign,
    tensor_with_diagonal,
)
from cache_manager import cached
from cykit_config import get_settings
from dgcore import DgFunctor, FiniteDgCategory, _accumulate, coef_from_json, presentation_to_json
from errors import IntegrityError, ObstructionError, PresentationError, RefusalError, SchemaError
from exactla import (
    ChainMap, GradedComplex, HomologyDims, SparseMatrix, block, cone, homology_basis, homology_dims,
    image_basis, IncrementalBasis, kernel_basis, solve,
)
from monitoring import logger, track_performance

Chain = Dict[Hashable, object]


class MixedComplex:
    """
    A cochain complex (b, degree +1) with Connes' operator (B, degree −1).

    ``connes_B[k]`` maps degree k to degree k−1. The identities B² = 0 and
    bB + Bb = 0 are verified on degrees ≥ ``verified_from`` (all degrees
    when it is None).
    """

    def __init__(self, underlying: GradedComplex, connes_B: Mapping[int, SparseMatrix], name: str = '',
                 category: FiniteDgCategory = None, window: Tuple[int, int] = None,
                 verified_from: Optional[int] = None, validate: bool = True):
        self.underlying = underlying
        self.connes_B = dict(connes_B)
        self.name = name
        self.category = category
        self.window = window
        self.verified_from = verified_from
        self.index = label_index(underlying)
        if validate:
            self.check()

    def __repr__(self):
        return f"MixedComplex({self.name!r}, dims={self.underlying.dims})"

    @property
    def field(self):
        return self.underlying.field

    @property
    def lo(self) -> int:
        return self.underlying.lo

    @property
    def hi(self) -> int:
        return self.underlying.hi

    @property
    def truncated(self) -> bool:
        return self.verified_from is not None

    def labels(self, k: int) -> List[Hashable]:
        return self.underlying.labels.get(k, [])

    def b(self, k: int) -> SparseMatrix:
        return self.underlying.differential(k)

    def B(self, k: int) -> SparseMatrix:
        m = self.connes_B.get(k)
        if m is None:
            c = self.underlying
            return SparseMatrix.zero(c.dim(k - 1), c.dim(k), self.field)
        return m

    def verified(self, k: int) -> bool:
        return self.verified_from is None or k >= self.verified_from

    def check(self) -> None:
        """Verify B² = 0 and bB + Bb = 0 exactly on the verified range."""
        for k in range(self.lo, self.hi + 1):
            if not self.verified(k):
                continue
            if not (self.B(k - 1) @ self.B(k)).is_zero():
                raise IntegrityError("B∘B ≠ 0", k)
            if not (self.b(k - 1) @ self.B(k) + self.B(k + 1) @ self.b(k)).is_zero():
                raise IntegrityError("bB + Bb ≠ 0", k)

    def to_vector(self, chain: Mapping[Hashable, object]) -> Tuple[Optional[int], Dict[int, object]]:
        """(degree, coordinates) of a homogeneous chain given on labels."""
        degree, vec = None, {}
        for lbl, v in chain.items():
            if not v:
                continue
            where = self.index.get(lbl)
            if where is None:
                raise RefusalError("to_vector", f"{lbl!r} is not a basis chain of {self.name}")
            if degree is not None and where[0] != degree:
                raise RefusalError("to_vector", "chain is not homogeneous")
            degree = where[0]
            vec[where[1]] = self.field.coerce(v)
        return degree, vec

    def to_chain(self, k: int, vec: Mapping[int, object]) -> Chain:
        labels = self.labels(k)
        return {labels[i]: v for i, v in vec.items() if v}

    def apply_b(self, k: int, vec: Mapping[int, object]) -> Dict[int, object]:
        return self.b(k).apply(vec)

    def apply_B(self, k: int, vec: Mapping[int, object]) -> Dict[int, object]:
        return self.B(k).apply(vec)


@dataclass
class HochschildClass:
    """A b-cycle of homological degree n (stored at cohomological degree −n)."""

    degree: int
    chain: Chain
    is_cycle: bool = False

    @property
    def cohomological_degree(self) -> int:
        return -self.degree


@dataclass
class NegativeCyclicClass:
    """
    Σ_j u^j c_j with b c_0 = 0 and b c_j + B c_{j−1} = 0.

    ``coefficients[j]`` is the chain of u^j, of homological degree n + 2j.
    ``truncation_order`` is the first order that could not be verified.
    """

    base_degree: int
    coefficients: List[Chain]
    truncation_order: Optional[int] = None
    closed: bool = False

    @property
    def underlying(self) -> HochschildClass:
        return HochschildClass(self.base_degree, dict(self.coefficients[0]) if self.coefficients else {}, True)

    def scaled(self, s) -> 'NegativeCyclicClass':
        return NegativeCyclicClass(self.base_degree, [{k: s * v for k, v in c.items()} for c in self.coefficients],
                                   self.truncation_order, self.closed)


@dataclass
class RelativeClass:
    """
    A cycle of the cone of CB(A) → CB(B) in homological degree n.

    ``source`` is a negative cyclic class of degree n − 1 on A; ``bounding``
    holds the u-coefficients β_j on B with f(α_j) + b β_j + B β_{j−1} = 0.
    """

    degree: int
    source: NegativeCyclicClass
    bounding: List[Chain] = dc_field(default_factory=list)

    def scaled(self, s) -> 'RelativeClass':
        return RelativeClass(self.degree, self.source.scaled(s),
                             [{k: s * v for k, v in c.items()} for c in self.bounding])


@dataclass
class HHEntry:
    """Dimension of HH_n with representative cycles."""

    dimension: int
    representatives: List[HochschildClass]
    unreliable: bool = False


@dataclass
class HCMinusDims:
    """Negative cyclic dimensions by cohomological degree."""

    dims: Dict[int, int]
    u_order: int
    unstable: FrozenSet[int] = frozenset()

    def reliable(self) -> Dict[int, int]:
        return {k: v for k, v in self.dims.items() if k not in self.unstable}


# ---------------------------------------------------------------------------
# Hochschild and mixed complexes

def _window(window) -> Tuple[int, int]:
    return tuple(window) if window else get_settings().degree_window


def _mixed_key(C: FiniteDgCategory, window=None):
    if C.presentation is None:
        return None
    return [presentation_to_json(C.presentation), C.weight_window, C.degree_window, repr(C.field),
            list(_window(window))]


def _connes_matrices(C: FiniteDgCategory, under: GradedComplex) -> Tuple[Dict[int, SparseMatrix], bool]:
    index = label_index(under)
    field = C.field
    B, pruned = {}, False
    for k, labels in under.labels.items():
        entries: Dict[Tuple[int, int], object] = {}
        for col, (m, key) in enumerate(labels):
            if C.is_identity(m):
                continue
            letters = (m,) + key[1]
            e = [C.degree(x) - 1 for x in letters]
            p = len(letters)
            for s in range(p):
                word = letters[p - s:] + letters[:p - s]
                x = C.src(word[0])
                where = index.get((C.identity(x), (x, word)))
                if where is None:
                    pruned = True
                    continue
                if where[0] != k - 1:
                    raise IntegrityError(f"B sends {(m, key)!r} to the wrong degree", k)
                _accumulate(entries, (where[1], col), field.coerce(sign(sum(e[p - s:]) * sum(e[:p - s]))))
        B[k] = SparseMatrix(under.dim(k - 1), under.dim(k), entries, field)
    return B, pruned


@cached(key_func=_mixed_key)
@track_performance
def mixed_complex(C: FiniteDgCategory, window: Tuple[int, int] = None) -> MixedComplex:
    """
    The normalized Hochschild complex of C with Connes' B.

    Words are labelled (m, (x, (a1, …, ap))) with m ∈ Hom(tgt ap, x). For a
    category with a nilpotent radical the complex is finite and the window
    is ignored; otherwise bar chains below the window are pruned and the
    mixed identities are verified two degrees above the window bottom.
    When the bar complex is cut by weight, only words of total weight up to
    the cut are kept.
    """
    window = _window(window)
    R = bar_resolution(C, degree_window=window)
    under = tensor_with_diagonal(R, max_weight=R.weight_bound)
    B, pruned = _connes_matrices(C, under)
    verified_from = window[0] + 2 if (R.truncated_below or pruned) else None
    mc = MixedComplex(under, B, name=f"CB({C.name})", category=C, window=window, verified_from=verified_from)
    logger.debug("Mixed complex built", category=C.name, dims=under.dims, verified_from=verified_from)
    return mc


def _homological(h: HomologyDims) -> HomologyDims:
    return HomologyDims({-k: v for k, v in h.items()}, {-k for k in h.unreliable})


def _unreliable(mc: MixedComplex, k: int) -> bool:
    if mc.window is None or not mc.truncated:
        return False
    return k <= mc.window[0]


@track_performance
def hh(C, window: Tuple[int, int] = None) -> Dict[int, HHEntry]:
    """
    Hochschild homology of C (or of a ready mixed complex) by homological degree.

    Returns:
        dict: n -> HHEntry with pivot-canonical representatives
    """
    mc = C if isinstance(C, MixedComplex) else mixed_complex(C, window)
    c = mc.underlying
    h = homology_dims(c)
    out = {}
    for k in range(c.lo, c.hi + 1):
        reps = [HochschildClass(-k, mc.to_chain(k, z), True) for z in homology_basis(c, k)] if h[k] else []
        out[-k] = HHEntry(h[k], reps, _unreliable(mc, k) or k in h.unreliable)
    return out


def hh_dims(C, window: Tuple[int, int] = None) -> Dict[int, int]:
    """Nonzero Hochschild dimensions by homological degree."""
    return {n: e.dimension for n, e in hh(C, window).items() if e.dimension}


def hh_per_weight(C: FiniteDgCategory, R=None, weights: Sequence[int] = None) -> Dict[int, HomologyDims]:
    """
    Hochschild homology of a weight-graded category one weight at a time,
    through a small resolution (default: the positive-weight arrows).

    Weights whose words could reach past the weight window are skipped.
    """
    if R is None:
        if C.presentation is None:
            raise RefusalError("hh_per_weight", "no presentation to read arrows from")
        R = periodic_resolution(C) if C.weight_periodic else arrow_resolution(C)
    if weights is None:
        if C.weight_window is None:
            raise RefusalError("hh_per_weight", "no weight window")
        lo, hi = C.weight_window
        span = max((abs(g.weight) for g in R.generators), default=0)
        weights = range(lo + span, hi - span + 1)
    return {w: _homological(homology_dims(tensor_with_diagonal(R, weight=w))) for w in weights}


def same_class(mc: MixedComplex, z1: Chain, z2: Chain) -> bool:
    """Whether two cycles differ by a boundary."""
    diff = dict(z1)
    for k, v in z2.items():
        _accumulate(diff, k, -v)
    if not diff:
        return True
    k, vec = mc.to_vector(diff)
    if mc.apply_b(k, vec):
        raise RefusalError("same_class", "the chains are not both cycles")
    return k > mc.lo and solve(mc.b(k - 1), vec) is not None


# ---------------------------------------------------------------------------
# functoriality and relative complexes

def functor_chain_map(F: DgFunctor, source: MixedComplex, target: MixedComplex) -> ChainMap:
    """CB(F) for a strict functor: apply F letterwise, dropping words with a unit letter."""
    tgt = F.target
    one = F.source.field.one

    def image(lbl):
        m, (x, chain) = lbl
        partial = [((m2,), v) for m2, v in F.apply({m: one}).items()]
        for a in chain:
            partial = [(word + (a2,), v * w)
                       for word, v in partial
                       for a2, w in F.apply({a: one}).items() if not tgt.is_identity(a2)]
        out = {}
        for word, v in partial:
            rest = word[1:]
            y = tgt.src(rest[0]) if rest else F.object_map[x]
            _accumulate(out, (word[0], (y, rest)), v)
        return out

    return chain_map_from_labels(source.underlying, target.underlying, image)


def commutes_with_connes(f: ChainMap, source: MixedComplex, target: MixedComplex) -> bool:
    """f∘B = B∘f on the degrees where both mixed complexes are verified."""
    for k in range(min(source.lo, target.lo), max(source.hi, target.hi) + 1):
        if not (source.verified(k) and target.verified(k)):
            continue
        if f.component(k - 1) @ source.B(k) != target.B(k) @ f.component(k):
            return False
    return True


def cone_mixed(f: ChainMap, source: MixedComplex, target: MixedComplex) -> MixedComplex:
    """
    The mixed complex cone(f): b = (−b_A, f + b_B), B = (−B_A, B_B).

    Labels are ('src', a) for a in degree k+1 of the source and ('tgt', b).
    """
    c = cone(f)
    A, T = source.underlying, target.underlying
    c.labels = {k: [('src', lbl) for lbl in A.labels.get(k + 1, [])] + [('tgt', lbl) for lbl in T.labels.get(k, [])]
                for k in range(c.lo, c.hi + 1)}
    Bm = {}
    for k in range(c.lo, c.hi + 1):
        Bm[k] = block([[-source.B(k + 1), None], [None, target.B(k)]],
                      [A.dim(k), T.dim(k - 1)], [A.dim(k + 1), T.dim(k)], c.field)
    bounds = [v for v in (source.verified_from - 1 if source.truncated else None, target.verified_from)
              if v is not None]
    return MixedComplex(c, Bm, name=f"cone({source.name}→{target.name})", window=target.window,
                        verified_from=max(bounds) if bounds else None)


def induced_rank(f: ChainMap, k: int) -> int:
    """Rank of H^k(f)."""
    A, T = f.source, f.target
    cycles = kernel_basis(A.differential(k)) if A.dim(k) else []
    span = IncrementalBasis(f.field)
    if k > T.lo:
        for v in image_basis(T.differential(k - 1)):
            span.add(v)
    base = span.dimension
    comp = f.component(k)
    for z in cycles:
        span.add(comp.apply(z))
    return span.dimension - base


@dataclass
class RelativeHochschild:
    """CB(B, A) = cone(CB(A) → CB(B)) with the data of its long exact sequence."""

    source: MixedComplex
    target: MixedComplex
    chain_map: ChainMap
    mixed: MixedComplex

    @property
    def complex(self) -> GradedComplex:
        return self.mixed.underlying

    def dims(self) -> HomologyDims:
        """Relative HH by homological degree."""
        return _homological(homology_dims(self.complex))

    def les_defects(self) -> List[int]:
        """
        Cohomological degrees where dim H(cone) ≠ coker H^k(f) + ker H^{k+1}(f).
        """
        hA, hT, hC = (homology_dims(x) for x in (self.source.underlying, self.target.underlying, self.complex))
        bad = []
        for k in range(self.complex.lo, self.complex.hi + 1):
            coker = hT.get(k, 0) - induced_rank(self.chain_map, k)
            ker = hA.get(k + 1, 0) - induced_rank(self.chain_map, k + 1)
            if hC.get(k, 0) != coker + ker:
                bad.append(k)
        return bad


@track_performance
def relative_hochschild(f, window: Tuple[int, int] = None) -> RelativeHochschild:
    """
    The relative Hochschild complex of a functor.

    ``f`` is a strict DgFunctor, or any object offering
    ``hh_chain_map(window) -> (source, target, chain_map)`` such as
    relcy.FunctorData.
    """
    if isinstance(f, DgFunctor):
        src, tgt = mixed_complex(f.source, window), mixed_complex(f.target, window)
        fmap = functor_chain_map(f, src, tgt)
    else:
        src, tgt, fmap = f.hh_chain_map(window)
    if not commutes_with_connes(fmap, src, tgt):
        raise IntegrityError("induced map does not commute with B")
    return RelativeHochschild(src, tgt, fmap, cone_mixed(fmap, src, tgt))


# ---------------------------------------------------------------------------
# negative cyclic homology

def u_truncated_complex(mc: MixedComplex, order: int) -> GradedComplex:
    """(C[[u]]/u^{order+1}, b + uB): degree k holds ⊕_j u^j C^{k−2j}."""
    c = mc.underlying
    lo, hi = c.lo, c.hi + 2 * order
    js = range(order + 1)
    dims = {k: sum(c.dim(k - 2 * j) for j in js) for k in range(lo, hi + 1)}
    d = {}
    for k in range(lo, hi):
        blocks = [[None] * (order + 1) for _ in js]
        for j in js:
            blocks[j][j] = mc.b(k - 2 * j)
            if j:
                blocks[j][j - 1] = mc.B(k - 2 * j + 2)
        d[k] = block(blocks, [c.dim(k + 1 - 2 * j) for j in js], [c.dim(k - 2 * j) for j in js], c.field)
    return GradedComplex(lo, hi, dims, d, c.field, truncated_below=mc.truncated)


@track_performance
def hc_minus_dims(C, window: Tuple[int, int] = None, u_order: int = None) -> HCMinusDims:
    """
    Negative cyclic dimensions on a cohomological window.

    Computed at u-orders N and N+1; degrees whose dimension differs, or that
    fall below the verified range of the mixed complex, are unstable.
    """
    window = _window(window)
    order = u_order if u_order is not None else get_settings().u_order
    mc = C if isinstance(C, MixedComplex) else mixed_complex(C, (window[0] - 2 * order - 3, window[1]))
    first, second = (homology_dims(u_truncated_complex(mc, n)) for n in (order, order + 1))
    dims, unstable = {}, set()
    for k in range(window[0], window[1] + 1):
        dims[k] = first.get(k, 0)
        if second.get(k, 0) != dims[k] or not mc.verified(k - 1):
            unstable.add(k)
    if unstable:
        logger.info("HC⁻ unstable degrees", complex=mc.name, degrees=sorted(unstable), u_order=order)
    return HCMinusDims(dims, order, frozenset(unstable))


def _lift_chain(mc: MixedComplex, k0: int, vec: Dict[int, object], max_order: int = None):
    coeffs = [vec]
    prev_k, prev, order = k0, vec, 1
    while True:
        rhs = mc.apply_B(prev_k, prev)
        if not rhs:
            return coeffs, None
        k = prev_k - 2
        if not mc.verified(prev_k) or (mc.truncated and mc.window and k <= mc.window[0]):
            return coeffs, order
        if max_order is not None and order > max_order:
            return coeffs, order
        x = solve(mc.b(k), {i: -v for i, v in rhs.items()})
        if x is None:
            raise ObstructionError(order)
        coeffs.append(x)
        prev_k, prev, order = k, x, order + 1


@track_performance
def lift_to_negative_cyclic(C, z: HochschildClass, vanishing_bound: int = None,
                            window: Tuple[int, int] = None, max_order: int = None) -> NegativeCyclicClass:
    """
    Lift a Hochschild cycle order by order: b c_j = −B c_{j−1}.

    The caller asserts HH_i = 0 for i > vanishing_bound, which makes every
    step solvable when deg z ≥ vanishing_bound.

    Raises:
        RefusalError: z is not a b-cycle
        ObstructionError: some order has no solution
    """
    mc = C if isinstance(C, MixedComplex) else mixed_complex(C, window)
    k0, vec = mc.to_vector(z.chain)
    if k0 is None:
        return NegativeCyclicClass(z.degree, [{}], None, True)
    if -k0 != z.degree:
        raise RefusalError("lift_to_negative_cyclic", f"chain has degree {-k0}, class says {z.degree}")
    if mc.apply_b(k0, vec):
        raise RefusalError("lift_to_negative_cyclic", "the chain is not a b-cycle")
    if vanishing_bound is not None and z.degree < vanishing_bound:
        logger.warning("Lifting below the vanishing bound", degree=z.degree, bound=vanishing_bound)
    coeffs, truncated_at = _lift_chain(mc, k0, vec, max_order)
    chains = [mc.to_chain(k0 - 2 * j, c) for j, c in enumerate(coeffs)]
    return NegativeCyclicClass(z.degree, chains, truncated_at, truncated_at is None)


def is_negative_cyclic_cycle(mc: MixedComplex, x: NegativeCyclicClass) -> bool:
    """Check b c_0 = 0 and b c_j + B c_{j−1} = 0 on the stored coefficients."""
    k0 = -x.base_degree
    vecs = [mc.to_vector(c)[1] for c in x.coefficients]
    for j, vec in enumerate(vecs):
        k = k0 - 2 * j
        lhs = mc.apply_b(k, vec)
        if j:
            for i, v in mc.apply_B(k + 2, vecs[j - 1]).items():
                _accumulate(lhs, i, v)
        if lhs:
            return False
    if x.closed and vecs and mc.apply_B(k0 - 2 * (len(vecs) - 1), vecs[-1]):
        return False
    return True


def lift_relative(rel: RelativeHochschild, degree: int, source_chain: Chain, target_chain: Chain = None,
                  max_order: int = None) -> RelativeClass:
    """
    Lift a relative Hochschild cycle (α, β) of homological degree n to a
    relative negative cyclic class.
    """
    chain = {('src', k): v for k, v in source_chain.items()}
    chain.update({('tgt', k): v for k, v in (target_chain or {}).items()})
    lifted = lift_to_negative_cyclic(rel.mixed, HochschildClass(degree, chain), max_order=max_order)
    alphas, betas = [], []
    for c in lifted.coefficients:
        alphas.append({lbl: v for (side, lbl), v in c.items() if side == 'src'})
        betas.append({lbl: v for (side, lbl), v in c.items() if side == 'tgt'})
    source = NegativeCyclicClass(degree - 1, alphas, lifted.truncation_order, lifted.closed)
    return RelativeClass(degree, source, betas)


# ---------------------------------------------------------------------------
# characters

@dataclass
class K0Character:
    """
    The map K_0 ⊗ k → HH_0 of a functor into perfect modules, as matrices.

    ``projective`` has one row per target object (the classes e_y); ``simple``
    re-expresses the columns in the basis of simple modules when the target
    has a nilpotent radical.
    """

    source_objects: List[str]
    target_objects: List[str]
    projective: SparseMatrix
    simple: Optional[SparseMatrix] = None


def cartan_matrix(C: FiniteDgCategory) -> SparseMatrix:
    """c_{xy} = Σ_{m ∈ Hom(x, y)} (−1)^{|m|}: the class of e_xC in simple modules."""
    objs = list(C.objects)
    entries = {}
    for i, x in enumerate(objs):
        for j, y in enumerate(objs):
            v = sum(sign(C.degree(m)) for m in C.hom(x, y))
            if v:
                entries[(i, j)] = v
    return SparseMatrix(len(objs), len(objs), entries, C.field)


def k0_character(f) -> K0Character:
    """
    Supertrace of each image complex: Σ (−1)^{shift} e_y over its summands.

    ``f`` offers ``target`` (a FiniteDgCategory), ``source_objects`` and
    ``summands(x) -> [(y, shift), …]``.
    """
    C = f.target
    tgt = list(C.objects)
    src = list(f.source_objects)
    row = {y: i for i, y in enumerate(tgt)}
    entries: Dict[Tuple[int, int], object] = {}
    for j, x in enumerate(src):
        for y, shift in f.summands(x):
            _accumulate(entries, (row[y], j), sign(shift))
    projective = SparseMatrix(len(tgt), len(src), entries, C.field)
    simple = cartan_matrix(C).transpose() @ projective if C.nilpotent_radical else None
    return K0Character(src, tgt, projective, simple)


# ---------------------------------------------------------------------------
# JSON

def label_to_json(C: FiniteDgCategory, lbl) -> dict:
    m, (x, word) = lbl
    return {'m': C.monomials[m].name, 'x': x, 'word': [C.monomials[a].name for a in word]}


def label_from_json(C: FiniteDgCategory, doc, path: str):
    if not isinstance(doc, dict) or set(doc) != {'m', 'x', 'word'}:
        raise SchemaError(path, "expected an object with keys m, x, word")
    try:
        return C.index(doc['m']), (doc['x'], tuple(C.index(a) for a in doc['word']))
    except (PresentationError, TypeError) as e:
        raise SchemaError(path, f"unknown monomial: {e}") from None


def chain_to_json(C: FiniteDgCategory, chain: Chain) -> list:
    return [[label_to_json(C, lbl), C.field.to_pair(v)] for lbl, v in sorted(chain.items(), key=lambda t: repr(t[0]))]


def chain_from_json(C: FiniteDgCategory, doc, path: str) -> Chain:
    if not isinstance(doc, list):
        raise SchemaError(path, "expected a list of [label, coefficient] pairs")
    out: Chain = {}
    for i, item in enumerate(doc):
        if not isinstance(item, list) or len(item) != 2:
            raise SchemaError(f"{path}[{i}]", "expected [label, coefficient]")
        c = coef_from_json(item[1], f"{path}[{i}][1]")
        _accumulate(out, label_from_json(C, item[0], f"{path}[{i}][0]"), C.field.from_pair(c.numerator, c.denominator))
    return out


def class_to_json(C: FiniteDgCategory, x) -> dict:
    """Serialize a HochschildClass or NegativeCyclicClass on the words of C."""
    if isinstance(x, HochschildClass):
        return {'schema': 1, 'kind': 'hochschild', 'degree': x.degree, 'chain': chain_to_json(C, x.chain)}
    return {'schema': 1, 'kind': 'negative_cyclic', 'degree': x.base_degree,
            'coefficients': [chain_to_json(C, c) for c in x.coefficients],
            'truncation_order': x.truncation_order, 'closed': x.closed}


def class_from_json(C: FiniteDgCategory, doc, path: str = '$'):
    if not isinstance(doc, dict):
        raise SchemaError(path, "expected an object")
    if doc.get('schema') != 1:
        raise SchemaError(f"{path}.schema", "unsupported schema version")
    kind = doc.get('kind')
    if not isinstance(doc.get('degree'), int):
        raise SchemaError(f"{path}.degree", "expected an integer")
    if kind == 'hochschild':
        extra = set(doc) - {'schema', 'kind', 'degree', 'chain'}
        if extra:
            raise SchemaError(path, f"unknown keys {sorted(extra)}")
        return HochschildClass(doc['degree'], chain_from_json(C, doc.get('chain'), f"{path}.chain"))
    if kind == 'negative_cyclic':
        extra = set(doc) - {'schema', 'kind', 'degree', 'coefficients', 'truncation_order', 'closed'}
        if extra:
            raise SchemaError(path, f"unknown keys {sorted(extra)}")
        coeffs = doc.get('coefficients')
        if not isinstance(coeffs, list):
            raise SchemaError(f"{path}.coefficients", "expected a list")
        x = NegativeCyclicClass(doc['degree'],
                                [chain_from_json(C, c, f"{path}.coefficients[{i}]") for i, c in enumerate(coeffs)],
                                doc.get('truncation_order'), bool(doc.get('closed')))
        _verify_loaded(C, x, path)
        return x
    raise SchemaError(f"{path}.kind", f"unknown class kind {kind!r}")


def _verify_loaded(C: FiniteDgCategory, x: NegativeCyclicClass, path: str) -> None:
    """A stored class must satisfy the cycle equations it claims."""
    try:
        mc = mixed_complex(C)
    except RefusalError as e:
        if x.closed:
            logger.warning("Stored class cannot be verified, dropping its closed flag", category=C.name, reason=str(e))
            x.closed = False
        return
    try:
        ok = is_negative_cyclic_cycle(mc, x)
    except RefusalError as e:
        raise SchemaError(f"{path}.coefficients", f"not a chain of {C.name}: {e}") from None
    if not ok:
        claim = "closed negative cyclic cycle" if x.closed else "truncated negative cyclic cycle"
        raise SchemaError(f"{path}.closed", f"the stored class is not a {claim}")
