"""
Relative Calabi-Yau structures of functors.

A functor from a coproduct of points into perfect modules over a finite
category S is one twisted complex L_x per point. Its induced bimodule
F_!A = ⊕_x L_x^∨ ⊗ L_x is free on generators (x, r, r') at (x_r, x_{r'}),
and the counit c: F_!A → S evaluates the diagonal generators. A relative
class (α, β) gives the middle map ξ: (F_!A)^! → F_!A and, through β, a
homotopy h with c ξ c^! + dh + hd = 0. The check certifies the three
vertical maps of the resulting ladder of fiber sequences

    S^!  --c^!-->  (F_!A)^!  -->  cof(c^!)
     |ξ′              |ξ              |ξ″
    fib(c) ------>  F_!A  ---c--->   S

piece by piece over object pairs of S. The right-handed mirror works with
strict functors between finite-dimensional categories and their linear
duals.
"""

from dataclasses import dataclass, field as dc_field
from typing import Dict, List, Mapping, Sequence

from bimodules import (
    DiagonalBimodule, FreeBimodule, FreeMap, Generator, LinearDual, _tau, arrow_resolution, bar_resolution,
    chain_map_from_labels, dual_key, dual_map, hom_into_enveloping, is_quadratic_monomial, koszul_resolution,
    label_index, lift_map, sign,
)
from cyduality import (
    CyReport, PerfectModule, _certificate, _underlying, check_left_cy, inverse_dualizing,
    phi, psi, transport_class,
)
from dgcore import (
    DgFunctor, FiniteDgCategory, _accumulate, _check_keys, coef_from_json, compile, coproduct, koszul_path,
    path_category, point, presentation_from_json, presentation_to_json,
)
from errors import IntegrityError, PresentationError, RefusalError, SchemaError
from exactla import ChainMap, GradedComplex, SparseMatrix, block, cone, field_from_settings, solve
from hochschild import (
    HochschildClass, MixedComplex, NegativeCyclicClass, RelativeClass, chain_from_json, chain_to_json,
    class_from_json, class_to_json, lift_relative, mixed_complex, relative_hochschild,
)
from monitoring import logger, track_performance


# ---------------------------------------------------------------------------
# functors into perfect modules

class FunctorData:
    """
    A functor from a coproduct of points into Perf(target).

    ``images`` maps a source object to its twisted complex; missing objects
    go to the zero module.
    """

    def __init__(self, source: FiniteDgCategory, target: FiniteDgCategory,
                 images: Mapping[str, PerfectModule], name: str = ''):
        self.source, self.target = source, target
        self.images = {x: P for x, P in images.items() if P.summands}
        self.name = name or f"{source.name}→Perf({target.name})"
        self._validate()

    def __repr__(self):
        return f"FunctorData({self.name!r}, images={len(self.images)})"

    def _validate(self) -> None:
        if any(not self.source.is_identity(i) for i in range(len(self.source))):
            raise RefusalError("functor", "the source must be a coproduct of points")
        for x, P in self.images.items():
            if x not in self.source.objects:
                raise RefusalError("functor", f"{x!r} is not a source object")
            if P.category is not self.target:
                raise RefusalError("functor", f"the image of {x!r} lives over another category")

    @property
    def source_objects(self) -> List[str]:
        return list(self.source.objects)

    def module(self, x: str) -> PerfectModule:
        return self.images.get(x) or PerfectModule(self.target, [], name=f"0@{x}")

    def summands(self, x: str):
        return self.module(x).summands

    def shifted(self, k: int) -> 'FunctorData':
        """Every image complex shifted by [k]."""
        return FunctorData(self.source, self.target, {x: P.shifted(k) for x, P in self.images.items()},
                           f"{self.name}[{k}]")

    def hh_chain_map(self, window=None):
        """(CB(source), CB(target), trace map) for relative_hochschild."""
        src, tgt = mixed_complex(self.source, window), mixed_complex(self.target, window)
        return src, tgt, _trace_map(self, src, tgt)


def _trace_map(f: FunctorData, source: MixedComplex, target: MixedComplex) -> ChainMap:
    S = f.target

    def image(lbl):
        m, (x, word) = lbl
        if word:
            raise RefusalError("hh_trace_map", f"unexpected word {word!r} over a point")
        out: Dict = {}
        for y, s in f.summands(x):
            _accumulate(out, (S.identity(y), (y, ())), S.field.coerce(sign(s)))
        return out

    return chain_map_from_labels(source.underlying, target.underlying, image)


def hh_trace_map(f: FunctorData, window=None) -> ChainMap:
    """The character map CB(source) → CB(target): e_x ↦ Σ_r (−1)^{s_r} e_{x_r}."""
    return f.hh_chain_map(window)[2]


def standard_functor(n: int, field=None, labels: Sequence[str] = None) -> FunctorData:
    """
    ⨿_{n+1} k → Perf(A_n), i ↦ L_i = (e_{i+1}S → e_iS) with e_0 = e_{n+1} = 0.

    ``labels`` names the n+1 source points, default 0..n.
    """
    if n < 1:
        raise RefusalError("standard_functor", "n must be at least 1")
    labels = list(labels) if labels is not None else [str(i) for i in range(n + 1)]
    if len(labels) != n + 1:
        raise RefusalError("standard_functor", f"expected {n + 1} point labels")
    field = field if field is not None else field_from_settings()
    source = compile(coproduct([point(x) for x in labels]), field=field)
    S = compile(path_category(n), field=field)
    one = S.field.one
    images = {labels[0]: PerfectModule(S, [('1', 1)], name='L0'),
              labels[n]: PerfectModule(S, [(str(n), 0)], name=f"L{n}")}
    for i in range(1, n):
        images[labels[i]] = PerfectModule(S, [(str(i), 0), (str(i + 1), 1)],
                                          {(0, 1): {S.index(f"rho{i}"): one}}, name=f"L{i}")
    return FunctorData(source, S, images, name=f"L(A{n})")


def koszul_functor(n: int, field=None, labels: Sequence[str] = None) -> FunctorData:
    """
    ⨿_{n+1} k → Perf(E_n), 0 ↦ L_0 = (e_1[1] → e_2[1] → … → e_n[1]) twisted by
    the arrows a_i, and i ↦ e_i for 1 ≤ i ≤ n.

    ``labels`` names the n+1 source points. For n = 1 this is the standard
    functor of A_1.
    """
    if n < 1:
        raise RefusalError("koszul_functor", "n must be at least 1")
    labels = list(labels) if labels is not None else [str(i) for i in range(n + 1)]
    if len(labels) != n + 1:
        raise RefusalError("koszul_functor", f"expected {n + 1} point labels")
    field = field if field is not None else field_from_settings()
    source = compile(coproduct([point(x) for x in labels]), field=field)
    E = compile(koszul_path(n), field=field)
    one = E.field.one
    images = {labels[0]: PerfectModule(E, [(str(i), 1) for i in range(1, n + 1)],
                                       {(i - 1, i): {E.index(f"a{i}"): one} for i in range(1, n)}, name='L0')}
    for i in range(1, n + 1):
        images[labels[i]] = PerfectModule(E, [(str(i), 0)], name=f"L{i}")
    return FunctorData(source, E, images, name=f"L(E{n})")


def canonical_relative_class(f: FunctorData, scale=1, window=None) -> RelativeClass:
    """
    The relative class with source coefficients all equal to ``scale``.

    The bounding chain β_0 solves b β_0 = −trace(α); it is zero whenever the
    supertraces cancel, as for the standard functor.
    """
    rel = relative_hochschild(f, window)
    s = f.source.field.coerce(scale)
    alpha = {(f.source.identity(x), (x, ())): s for x in f.source_objects} if s else {}
    beta = {}
    if alpha:
        k, vec = rel.source.to_vector(alpha)
        image = rel.chain_map.component(k).apply(vec)
        if image:
            x = solve(rel.target.b(k - 1), {i: -v for i, v in image.items()})
            if x is None:
                raise RefusalError("canonical_relative_class", "the trace of the source class is not a boundary")
            beta = rel.target.to_chain(k - 1, x)
    return lift_relative(rel, 1, alpha, beta)


# ---------------------------------------------------------------------------
# counit

@dataclass
class CounitData:
    """F_!A with its counit c, the lift c̃ through R_S and the dual c^!: S^! → (F_!A)^!."""

    functor: FunctorData
    pushed: FreeBimodule
    counit: FreeMap
    resolution: FreeBimodule
    lifted: FreeMap
    pushed_dual: FreeBimodule
    target_dual: FreeBimodule
    counit_dual: FreeMap


def pushed_diagonal(f: FunctorData) -> FreeBimodule:
    """
    F_!A = ⊕_x L_x^∨ ⊗ L_x. Generator (x, r, q) has level s_r − s_q and

        D(x, r, q) = −(−1)^{s_r} Σ δ_{r r2} ⊗ (x, r2, q) ⊗ 1 + (−1)^{s_r} Σ 1 ⊗ (x, r, r1) ⊗ δ_{r1 q}.
    """
    S = f.target
    gens, D = [], {}
    for x in f.source_objects:
        P = f.images.get(x)
        if P is None:
            continue
        for r, (xr, sr) in enumerate(P.summands):
            for q, (xq, sq) in enumerate(P.summands):
                key = (x, r, q)
                gens.append(Generator(key, xr, xq, sr - sq, 0, P.weights[q] - P.weights[r]))
                terms = []
                for (r1, r2), elem in P.twisting.items():
                    if r1 == r:
                        terms += [(-sign(sr) * c, m, (x, r2, q), S.identity(xq)) for m, c in elem.items()]
                    if r2 == q:
                        terms += [(sign(sr) * c, S.identity(xr), (x, r, r1), m) for m, c in elem.items()]
                D[key] = terms
    return FreeBimodule(S, gens, D, name=f"F_!({f.name})")


def _default_resolution(S: FiniteDgCategory) -> FreeBimodule:
    p = S.presentation
    if p is not None and not p.relations and not S.has_differential:
        return arrow_resolution(S)
    if is_quadratic_monomial(S):
        try:
            return koszul_resolution(S)
        except RefusalError as e:
            logger.debug("Falling back to the bar resolution", category=S.name, reason=e.reason)
    return bar_resolution(S)


@track_performance
def build_counit(f: FunctorData, R: FreeBimodule = None) -> CounitData:
    """
    Assemble F_!A, the evaluation counit and its dual through the δ identification.

    Raises:
        RefusalError: the target has a differential
    """
    S = f.target
    if S.has_differential:
        raise RefusalError("build_counit", "targets with a differential are not supported")
    R = R if R is not None else _default_resolution(S)
    pushed = pushed_diagonal(f)
    one = S.field.one
    images = {g.key: {S.identity(g.left): one} for g in pushed.generators if g.key[1] == g.key[2]}
    counit = FreeMap(pushed, DiagonalBimodule(S), images)
    lifted = lift_map(counit, R)
    pushed_dual = hom_into_enveloping(pushed)
    target_dual = inverse_dualizing(S, R)
    counit_dual = dual_map(lifted, pushed_dual, target_dual)
    logger.debug("Counit assembled", functor=f.name, generators=len(pushed.generators), resolution=R.name)
    return CounitData(f, pushed, counit, R, lifted, pushed_dual, target_dual, counit_dual)


def _colouring(P: PerfectModule) -> List[int]:
    """A 2-colouring of the twisting graph, each component seeded with the parity of its first shift."""
    edges: Dict[int, set] = {}
    for r, s in P.twisting:
        edges.setdefault(r, set()).add(s)
        edges.setdefault(s, set()).add(r)
    colour: List = [None] * len(P.summands)
    for start in range(len(P.summands)):
        if colour[start] is not None:
            continue
        colour[start] = P.summands[start][1] % 2
        queue = [start]
        while queue:
            r = queue.pop(0)
            for s in edges.get(r, ()):
                if colour[s] is None:
                    colour[s] = 1 - colour[r]
                    queue.append(s)
                elif colour[s] == colour[r]:
                    raise RefusalError("middle_map", f"the twisting graph of {P.name or 'a module'} is not bipartite")
    return colour


def middle_map(cd: CounitData, scales: Mapping[str, object]) -> FreeMap:
    """
    ξ: (F_!A)^! → F_!A induced by the source class Σ_x a_x e_x,

        ξ((x, p, q)^∨) = (−1)^{c(p) + c(q) + s_p + τ(s_p − s_q)} a_x · (x, q, p)

    with c a 2-colouring of the twisting graph of L_x.
    """
    f, S = cd.functor, cd.functor.target
    colours = {x: _colouring(P) for x, P in f.images.items() if scales.get(x)}
    images = {}
    for g in cd.pushed.generators:
        x, p, q = g.key
        a = scales.get(x)
        if not a:
            continue
        (xp, sp), (xq, sq) = f.images[x].summands[p], f.images[x].summands[q]
        c = colours[x]
        s = sign(c[p] + c[q] + sp + _tau(sp - sq))
        images[dual_key(g.key)] = {(S.identity(xq), (x, q, p), S.identity(xp)): s * a}
    return FreeMap(cd.pushed_dual, cd.pushed, images)


# ---------------------------------------------------------------------------
# the ladder of fiber sequences

@dataclass
class _Square:
    """One piece P --top--> Q --middle--> M --bottom--> D with H[k]: P^k → D^{k−1}."""

    top: ChainMap
    middle: ChainMap
    bottom: ChainMap
    homotopy: Dict[int, SparseMatrix]

    def h(self, k: int) -> SparseMatrix:
        P, D = self.top.source, self.bottom.target
        m = self.homotopy.get(k)
        return m if m is not None else SparseMatrix.zero(D.dim(k - 1), P.dim(k), P.field)


def _homotopy_matrices(image, P: GradedComplex, D: GradedComplex) -> Dict[int, SparseMatrix]:
    where = label_index(D)
    out = {}
    for k, labels in P.labels.items():
        entries = {}
        for col, lbl in enumerate(labels):
            for m, v in image(lbl).items():
                pos = where.get(m)
                if pos is None or pos[0] != k - 1:
                    raise IntegrityError(f"homotopy sends {lbl!r} outside degree {k - 1}", k)
                entries[(pos[1], col)] = v
        out[k] = SparseMatrix(D.dim(k - 1), P.dim(k), entries, P.field)
    return out


def _homotopy_sign(operation: str, squares: Mapping[str, _Square]) -> int:
    """The σ = ±1 with bottom∘middle∘top + σ(dH + Hd) = 0 on every piece."""
    candidates = {1, -1}
    for sq in squares.values():
        P, D = sq.top.source, sq.bottom.target
        for k in range(min(P.lo, D.lo) - 1, max(P.hi, D.hi) + 2):
            K = sq.bottom.component(k) @ sq.middle.component(k) @ sq.top.component(k)
            E = D.differential(k - 1) @ sq.h(k) + sq.h(k + 1) @ P.differential(k)
            if not (K + E).is_zero():
                candidates.discard(1)
            if not (K - E).is_zero():
                candidates.discard(-1)
            if not candidates:
                raise RefusalError(operation, f"the homotopy does not bound the composite in degree {k}")
    return 1 if 1 in candidates else -1


def _fiber_map(sq: _Square, s: int) -> ChainMap:
    """ξ′: P → fib(bottom), as P[1] → cone(bottom) with components [middle∘top ; σH]."""
    P, M, D = sq.top.source, sq.bottom.source, sq.bottom.target
    field = P.field
    shifted = GradedComplex(P.lo - 1, P.hi - 1, {k: P.dim(k + 1) for k in range(P.lo - 1, P.hi)},
                            {k: -P.differential(k + 1) for k in range(P.lo - 1, P.hi - 1)}, field)
    fib = cone(sq.bottom)
    comps = {}
    for k in range(shifted.lo, shifted.hi + 1):
        X = sq.middle.component(k + 1) @ sq.top.component(k + 1)
        comps[k] = block([[X], [sq.h(k + 1).scale(s)]], [M.dim(k + 1), D.dim(k)], [P.dim(k + 1)], field)
    return ChainMap(shifted, fib, comps)


def _cofiber_map(sq: _Square, s: int) -> ChainMap:
    """ξ″: cof(top) → D with components [−σH | bottom∘middle]."""
    P, Q, D = sq.top.source, sq.top.target, sq.bottom.target
    cof = cone(sq.top)
    comps = {}
    for k in range(cof.lo, cof.hi + 1):
        Y = sq.bottom.component(k) @ sq.middle.component(k)
        comps[k] = block([[sq.h(k + 1).scale(-s), Y]], [D.dim(k)], [P.dim(k + 1), Q.dim(k)], P.field)
    return ChainMap(cof, D, comps)


def _ladder(operation: str, kind: str, n: int, squares: Mapping[str, _Square], complete: bool,
            notes: List[str]) -> CyReport:
    s = _homotopy_sign(operation, squares)
    if s < 0:
        notes.append("the homotopy enters with the opposite sign")
    certificates = {
        'xi_prime': _certificate({name: cone(_fiber_map(sq, s)) for name, sq in squares.items()}, False),
        'xi': _certificate({name: cone(sq.middle) for name, sq in squares.items()}, False),
        'xi_double_prime': _certificate({name: cone(_cofiber_map(sq, s)) for name, sq in squares.items()}, False),
    }
    return CyReport(kind, n, certificates, complete, notes=notes)


# ---------------------------------------------------------------------------
# relative left Calabi-Yau

def _check_relative_cycle(f: FunctorData, alpha: Mapping, beta: Mapping, window=None) -> None:
    src, tgt, fmap = f.hh_chain_map(window)
    ka, va = src.to_vector(alpha)
    kb, vb = tgt.to_vector(beta)
    total: Dict[int, object] = {}
    if ka is not None:
        if src.apply_b(ka, va):
            raise RefusalError("check_relative_left_cy", "the source chain is not a b-cycle")
        for i, v in fmap.component(ka).apply(va).items():
            _accumulate(total, i, v)
    if kb is not None:
        if ka is not None and kb != ka - 1:
            raise RefusalError("check_relative_left_cy", "source and bounding chains have mismatched degrees")
        for i, v in tgt.apply_b(kb, vb).items():
            _accumulate(total, i, v)
    if total:
        raise RefusalError("check_relative_left_cy", "the bounding chain does not bound the trace of the source chain")


def _point_scales(f: FunctorData, alpha: Mapping) -> Dict[str, object]:
    scales = {}
    for (m, (x, word)), c in alpha.items():
        if word or not f.source.is_identity(m):
            raise RefusalError("check_relative_left_cy", "source chains over points are sums of units")
        scales[x] = c
    return scales


def _left_homotopy(cd: CounitData, beta: Mapping) -> FreeMap:
    S, R = cd.functor.target, cd.resolution
    z = HochschildClass(1, dict(beta))
    if beta and R.kind != 'bar':
        z = transport_class(z, bar_resolution(S), R)
    return phi(S, z, R, validate=False)


@track_performance
def check_relative_left_cy(f: FunctorData, rel: RelativeClass, n: int = None, counit: CounitData = None,
                           window=None) -> CyReport:
    """
    Relative left n-Calabi-Yau check of ``f`` with the class ``rel``.

    Returns:
        CyReport of kind 'relative-left' with certificates for ξ′, ξ and ξ″

    Raises:
        RefusalError: the class is not a relative cycle, the homotopy does
            not bound c ξ c^!, or the target is not finite
    """
    S = f.target
    n = rel.degree if n is None else n
    if rel.degree != n:
        raise RefusalError("check_relative_left_cy", f"class has degree {rel.degree}, expected {n}")
    if S.weight_periodic or (S.truncated and not S.nilpotent_radical):
        raise RefusalError("check_relative_left_cy", "the target must be finite")
    _, complete, notes = _underlying("check_relative_left_cy", rel.source)
    alpha = rel.source.coefficients[0] if rel.source.coefficients else {}
    beta = rel.bounding[0] if rel.bounding else {}
    _check_relative_cycle(f, alpha, beta, window)
    cd = counit if counit is not None else build_counit(f)
    if not cd.pushed.generators:
        lift = NegativeCyclicClass(n, [dict(c) for c in rel.bounding] or [{}], rel.source.truncation_order,
                                   rel.source.closed)
        absolute = check_left_cy(S, lift, n)
        cert = absolute.certificates['phi']
        notes.append("the induced bimodule vanishes; the check reduces to the absolute one")
        report = CyReport('relative-left', n, {'xi_prime': cert, 'xi': _certificate({}, False),
                                               'xi_double_prime': cert},
                          complete and absolute.lift_complete, notes=notes + absolute.notes)
    else:
        if n != 1:
            raise RefusalError("check_relative_left_cy", "functors out of points carry relative classes of dimension 1")
        xi = middle_map(cd, _point_scales(f, alpha))
        h = _left_homotopy(cd, beta)
        diag = DiagonalBimodule(S)
        squares = {}
        for u in S.objects:
            for v in S.objects:
                top, middle, bottom = cd.counit_dual.piece(u, v), xi.piece(u, v), cd.counit.piece(u, v)
                H = _homotopy_matrices(lambda lbl: diag.act(lbl[0], h.images.get(lbl[1], {}), lbl[2]),
                                       top.source, bottom.target)
                squares[f"{u},{v}"] = _Square(top, middle, bottom, H)
        report = _ladder("check_relative_left_cy", 'relative-left', n, squares, complete, notes)
    logger.info("Relative left Calabi-Yau check", functor=f.name, dimension=n, verdict=report.verdict)
    return report


# ---------------------------------------------------------------------------
# relative right Calabi-Yau

@dataclass
class RelativeFunctional:
    """ω on the target (degree n − 1) and θ on the source (degree n)."""

    target: Dict[int, object]
    source: Dict[int, object] = dc_field(default_factory=dict)

    def scaled(self, s) -> 'RelativeFunctional':
        return RelativeFunctional({i: s * v for i, v in self.target.items()},
                                  {i: s * v for i, v in self.source.items()})


def _restrict_dual(f: DgFunctor, lbl, u: str, v: str) -> Dict:
    """u^*: ('*', j) ↦ Σ_i [coefficient of j in f(i)] ('*', i), i ∈ Hom(v, u)."""
    A = f.source
    one = A.field.one
    out = {}
    for i in A.hom(v, u):
        c = f.apply({i: one}).get(lbl[1])
        if c:
            out[('*', i)] = c
    return out


@track_performance
def check_relative_right_cy(f: DgFunctor, cocycle: RelativeFunctional, n: int) -> CyReport:
    """
    Relative right n-Calabi-Yau check of a strict functor f: A → B between
    finite-dimensional categories.

    ξ = Ψ_B(ω): F^*B[n−1] → (F^*B)^*, the unit u is f itself and Ψ_A(θ)
    is the homotopy of u^* ξ u.
    """
    A, B = f.source, f.target
    for C in (A, B):
        if C.truncated and not C.nilpotent_radical:
            raise RefusalError("check_relative_right_cy", f"{C.name} is not finite-dimensional")
    xi = psi(B, cocycle.target, n - 1)
    h = psi(A, cocycle.source, n)
    a_diag, b_diag = DiagonalBimodule(A, n - 1), DiagonalBimodule(B, n - 1)
    a_dual, b_dual = LinearDual(A), LinearDual(B)
    one = A.field.one
    squares = {}
    for u in A.objects:
        for v in A.objects:
            fu, fv = f.object_map[u], f.object_map[v]
            P, Q = a_diag.piece(u, v), b_diag.piece(fu, fv)
            M, D = b_dual.piece(fu, fv), a_dual.piece(u, v)
            top = chain_map_from_labels(P, Q, lambda m: f.apply({m: one}))
            middle = chain_map_from_labels(Q, M, xi.image)
            bottom = chain_map_from_labels(M, D, lambda lbl, u=u, v=v: _restrict_dual(f, lbl, u, v))
            squares[f"{u},{v}"] = _Square(top, middle, bottom, _homotopy_matrices(h.image, P, D))
    report = _ladder("check_relative_right_cy", 'relative-right', n, squares, True, [])
    logger.info("Relative right Calabi-Yau check", source=A.name, target=B.name, dimension=n,
                verdict=report.verdict)
    return report


# ---------------------------------------------------------------------------
# JSON

def _monomial(C: FiniteDgCategory, name, path: str) -> int:
    try:
        return C.index(name)
    except PresentationError:
        raise SchemaError(path, f"unknown monomial {name!r}") from None


def functor_to_json(f: FunctorData) -> dict:
    S = f.target
    images = []
    for x in f.source_objects:
        P = f.images.get(x)
        if P is None:
            continue
        images.append({
            'object': x,
            'terms': [{'gen_obj': y, 'shift': s} for y, s in P.summands],
            'differential': [{'row': r, 'col': c,
                              'element': [[S.monomials[m].name, S.field.to_pair(v)] for m, v in sorted(elem.items())]}
                             for (r, c), elem in sorted(P.twisting.items())],
        })
    return {'schema': 1, 'name': f.name, 'source': presentation_to_json(f.source.presentation),
            'target': presentation_to_json(S.presentation), 'images': images}


def functor_from_json(doc, path: str = '$', field=None) -> FunctorData:
    """Parse a schema-1 functor document; the images are validated as twisted complexes."""
    _check_keys(doc, {'schema', 'name', 'source', 'target', 'images'}, path, ('schema', 'source', 'target'))
    if doc['schema'] != 1:
        raise SchemaError(f"{path}.schema", f"unsupported schema {doc['schema']!r}")
    field = field if field is not None else field_from_settings()
    source = compile(presentation_from_json(doc['source'], f"{path}.source"), field=field)
    S = compile(presentation_from_json(doc['target'], f"{path}.target"), field=field)
    images = {}
    for i, item in enumerate(doc.get('images', [])):
        where = f"{path}.images[{i}]"
        _check_keys(item, {'object', 'terms', 'differential'}, where, ('object', 'terms'))
        summands = []
        for j, t in enumerate(item['terms']):
            _check_keys(t, {'gen_obj', 'shift'}, f"{where}.terms[{j}]", ('gen_obj', 'shift'))
            if not isinstance(t['shift'], int):
                raise SchemaError(f"{where}.terms[{j}].shift", "expected an integer")
            summands.append((str(t['gen_obj']), t['shift']))
        twisting = {}
        for j, entry in enumerate(item.get('differential', [])):
            at = f"{where}.differential[{j}]"
            _check_keys(entry, {'row', 'col', 'element'}, at, ('row', 'col', 'element'))
            elem = {}
            for k, term in enumerate(entry['element']):
                if not isinstance(term, list) or len(term) != 2:
                    raise SchemaError(f"{at}.element[{k}]", "expected [monomial, [num, den]]")
                q = coef_from_json(term[1], f"{at}.element[{k}][1]")
                m = _monomial(S, term[0], f"{at}.element[{k}][0]")
                _accumulate(elem, m, S.field.from_pair(q.numerator, q.denominator))
            twisting[(entry['row'], entry['col'])] = elem
        images[str(item['object'])] = PerfectModule(S, summands, twisting, name=f"image of {item['object']}")
    return FunctorData(source, S, images, str(doc.get('name', '')))


def relative_class_to_json(f: FunctorData, rel: RelativeClass) -> dict:
    return {'schema': 1, 'kind': 'relative', 'degree': rel.degree,
            'source': class_to_json(f.source, rel.source),
            'bounding': [chain_to_json(f.target, c) for c in rel.bounding]}


def relative_class_from_json(f: FunctorData, doc, path: str = '$') -> RelativeClass:
    _check_keys(doc, {'schema', 'kind', 'degree', 'source', 'bounding'}, path, ('schema', 'kind', 'degree', 'source'))
    if doc['schema'] != 1 or doc['kind'] != 'relative':
        raise SchemaError(path, "expected a schema-1 relative class")
    if not isinstance(doc['degree'], int):
        raise SchemaError(f"{path}.degree", "expected an integer")
    source = class_from_json(f.source, doc['source'], f"{path}.source")
    if not isinstance(source, NegativeCyclicClass):
        source = NegativeCyclicClass(source.degree, [source.chain])
    bounding = [chain_from_json(f.target, c, f"{path}.bounding[{i}]") for i, c in enumerate(doc.get('bounding', []))]
    return RelativeClass(doc['degree'], source, bounding)
