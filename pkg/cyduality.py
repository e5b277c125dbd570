"""
Calabi-Yau duality checks.

Left structures compare the inverse dualizing bimodule A^! = Hom_{A^e}(R, A^e)
with A[−n] through the contraction map Φ of a Hochschild cycle; right
structures compare A[n] with the linear dual A^* through the pairing Ψ of a
cyclic functional. Every verdict is a certificate of cone acyclicity,
computed piece by piece over object pairs (or per weight for
weight-periodic categories).
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from typing import Callable, Dict, Hashable, List, Mapping, Optional, Sequence, Tuple

from bimodules import (
    Bimodule, DiagonalBimodule, FreeBimodule, FreeMap, LinearDual, _tau, augmentation_map, bar_resolution,
    chain_map_from_labels, complex_from_basis, dual_key, hom_into_enveloping, label_index, lift_map,
    periodic_resolution, sign, tensor_map_with_diagonal, tensor_with_diagonal,
)
from cykit_config import get_settings
from dgcore import FiniteDgCategory, _accumulate
from errors import IntegrityError, RefusalError
from exactla import GradedComplex, cone, homology_basis, homology_dims, rank, SparseMatrix
from hochschild import HochschildClass, NegativeCyclicClass
from monitoring import logger, track_performance


# ---------------------------------------------------------------------------
# certificates

@dataclass
class QuasiIsoCertificate:
    """
    Cone homology of a bimodule map, summed over pieces.

    ``verdict`` is True when every piece is acyclic, False when some
    unflagged degree survives and None (inconclusive) when only flagged
    degrees survive.
    """

    verdict: Optional[bool]
    cone_homology: Dict[int, int]
    pieces: Dict[str, Dict[int, int]]
    window: Tuple[int, int]
    truncated: bool = False
    flagged: List[int] = dc_field(default_factory=list)
    notes: List[str] = dc_field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.verdict is True

    def to_json(self) -> dict:
        return {
            'verdict': {True: 'pass', False: 'fail', None: 'inconclusive'}[self.verdict],
            'cone_homology': {str(k): v for k, v in sorted(self.cone_homology.items()) if v},
            'pieces': {name: {str(k): v for k, v in sorted(h.items()) if v} for name, h in self.pieces.items()},
            'window': list(self.window),
            'truncated': self.truncated,
            'flagged': sorted(self.flagged),
            'notes': list(self.notes),
        }


def _certificate(cones: Mapping[str, GradedComplex], truncated: bool, notes=()) -> QuasiIsoCertificate:
    threads = get_settings().threads
    names = list(cones)
    if threads > 1 and len(names) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = dict(zip(names, pool.map(lambda n: homology_dims(cones[n], threads=1), names)))
    else:
        results = {n: homology_dims(cones[n], threads=1) for n in names}
    total: Dict[int, int] = {}
    flagged = set()
    unflagged_bad = False
    for n, h in results.items():
        for k, v in h.items():
            total[k] = total.get(k, 0) + v
            if v:
                if truncated or k in h.unreliable:
                    flagged.add(k)
                else:
                    unflagged_bad = True
    lo = min((c.lo for c in cones.values()), default=0)
    hi = max((c.hi for c in cones.values()), default=0)
    if unflagged_bad:
        verdict = False
    elif flagged:
        verdict = None
    else:
        verdict = True
    return QuasiIsoCertificate(verdict, total, {n: dict(h) for n, h in results.items()}, (lo, hi),
                               truncated, sorted(flagged), list(notes))


def _truncated(m) -> bool:
    C = m.source.category
    flags = [getattr(m.source, 'truncated_below', False), getattr(m.target, 'truncated_below', False)]
    return any(flags) or (C.truncated and not C.nilpotent_radical)


@track_performance
def is_quasi_iso(m, pairs: Sequence[Tuple[str, str]] = None, weights: Sequence[int] = None) -> QuasiIsoCertificate:
    """
    Certify a bimodule map by acyclicity of cone(m) on every object pair.

    ``m`` offers ``piece(u, v) -> ChainMap`` (FreeMap, ExplicitMap); with
    ``weights`` only the listed weight pieces are built, which needs
    ``piece(u, v, weight)``.
    """
    C = m.source.category
    pairs = pairs if pairs is not None else [(u, v) for u in C.objects for v in C.objects]
    if weights is None:
        cones = {f"{u},{v}": cone(m.piece(u, v)) for u, v in pairs}
        notes = []
    else:
        cones = {f"{u},{v}@{w}": cone(m.piece(u, v, w)) for u, v in pairs for w in weights}
        notes = [f"computed in weights {list(weights)}"]
    cert = _certificate(cones, _truncated(m), notes)
    logger.info("Quasi-isomorphism certificate", map=getattr(m.source, 'name', ''), verdict=cert.verdict)
    return cert


def is_quasi_iso_periodic(F: FreeMap, R: FreeBimodule, weights: Sequence[int] = (0,),
                          radius: int = None) -> QuasiIsoCertificate:
    """
    Certificate for F: M → C[k] over a weight-periodic category.

    F is lifted through R[k] → C[k]; the lift tensored with the diagonal
    must be a quasi-isomorphism in each listed weight. Transport to the other
    weights along the periodic units is assumed.
    """
    radius = radius if radius is not None else get_settings().support_radius
    lifted = lift_map(F, R, radius)
    cones = {}
    for w in weights:
        src = tensor_with_diagonal(lifted.source, weight=w)
        tgt = tensor_with_diagonal(lifted.target, weight=w)
        cones[f"weight {w}"] = cone(tensor_map_with_diagonal(lifted, src, tgt))
    note = f"computed in weights {list(weights)}, transported along the periodic units"
    return _certificate(cones, False, [note])


# ---------------------------------------------------------------------------
# explicit maps

class ExplicitMap:
    """A degree-0 bimodule map given on basis labels of explicit bimodules."""

    def __init__(self, source: Bimodule, target: Bimodule, image: Callable[[Hashable], Dict]):
        self.source, self.target = source, target
        self.image = image

    def piece(self, u: str, v: str):
        return chain_map_from_labels(self.source.piece(u, v), self.target.piece(u, v), self.image)

    def check_bimodule(self) -> None:
        """f(a·x·b) = a·f(x)·b on all basis triples."""
        C = self.source.category
        one = C.field.one
        for u in C.objects:
            for v in C.objects:
                for x in self.source.basis(u, v):
                    fx = self.image(x)
                    for a in [i for w in C.objects for i in C.hom(w, u)]:
                        for b in [i for w in C.objects for i in C.hom(v, w)]:
                            lhs = {}
                            for lbl, c in self.source.act(a, {x: one}, b).items():
                                for out, v2 in self.image(lbl).items():
                                    _accumulate(lhs, out, c * v2)
                            if lhs != self.target.act(a, fx, b):
                                raise IntegrityError(f"map is not bimodule-linear at {x!r}")


# ---------------------------------------------------------------------------
# left Calabi-Yau

def inverse_dualizing(C: FiniteDgCategory, R: FreeBimodule = None) -> FreeBimodule:
    """A^! = Hom_{C^e}(R, C^e); R defaults to the bar resolution."""
    R = R if R is not None else bar_resolution(C)
    dual = hom_into_enveloping(R)
    dual.resolution = R
    return dual


def _chain_degree(R: FreeBimodule, chain: Mapping) -> Optional[int]:
    C = R.category
    degrees = set()
    for m, key in chain:
        if key not in R.gen:
            raise RefusalError("phi", f"chain label {key!r} is not a generator of {R.name}")
        degrees.add(C.degree(m) + R.gen[key].degree)
    if len(degrees) > 1:
        raise IntegrityError("Hochschild chain is not homogeneous")
    return degrees.pop() if degrees else None


def phi(C: FiniteDgCategory, z, R: FreeBimodule = None, validate: bool = True) -> FreeMap:
    """
    Contraction with a Hochschild cycle: Φ(z): A^! → A[−n].

    For z = Σ c m⊗g on R ⊗_{C^e} C, Φ(z)(g^∨) = Σ (−1)^{τ(|g|) + |m|} c m. With
    ``validate=False`` z may be any chain; the result is then only a map of
    graded bimodules.
    """
    R = R if R is not None else bar_resolution(C)
    chain = z.chain if isinstance(z, HochschildClass) else z
    k = _chain_degree(R, chain)
    if k is None:
        k = -z.degree if isinstance(z, HochschildClass) else 0
    images: Dict[Hashable, Dict] = {}
    for (m, key), c in chain.items():
        s = sign(_tau(R.gen[key].degree) + C.degree(m))
        _accumulate(images.setdefault(dual_key(key), {}), m, s * c)
    return FreeMap(inverse_dualizing(C, R), DiagonalBimodule(C, k), images, validate)


def resolution_classes(R: FreeBimodule, n: int, weight: int = None) -> List[HochschildClass]:
    """Representative cycles of HH_n computed on R ⊗_{C^e} C."""
    c = tensor_with_diagonal(R, weight)
    labels = c.labels.get(-n, [])
    return [HochschildClass(n, {labels[i]: v for i, v in vec.items()}, True) for vec in homology_basis(c, -n)]


def transport_class(z: HochschildClass, source: FreeBimodule, target: FreeBimodule) -> HochschildClass:
    """Move a cycle between resolutions along the comparison map source → target."""
    comparison = lift_map(augmentation_map(source), target)
    src, tgt = tensor_with_diagonal(source), tensor_with_diagonal(target)
    f = tensor_map_with_diagonal(comparison, src, tgt)
    where = label_index(src)
    vec = {}
    for lbl, c in z.chain.items():
        vec[where[lbl][1]] = c
    k = -z.degree
    out = f.component(k).apply(vec) if vec else {}
    labels = tgt.labels.get(k, [])
    return HochschildClass(z.degree, {labels[i]: v for i, v in out.items()}, z.is_cycle)


@dataclass
class PairingCheck:
    """Rank of the induced pairing H^k Hom(P_i, P_j) ⊗ H^{−n−k} Hom(P_j, P_i) → k."""

    pair: Tuple[int, int]
    degree: int
    size: Tuple[int, int]
    rank: int

    @property
    def perfect(self) -> bool:
        return self.size[0] == self.size[1] == self.rank


@dataclass
class CyReport:
    """Outcome of a Calabi-Yau check."""

    kind: str
    dimension: int
    certificates: Dict[str, QuasiIsoCertificate]
    lift_complete: bool = True
    pairings: List[PairingCheck] = dc_field(default_factory=list)
    notes: List[str] = dc_field(default_factory=list)

    @property
    def verdict(self) -> Optional[bool]:
        verdicts = [c.verdict for c in self.certificates.values()]
        if any(v is False for v in verdicts) or any(not p.perfect for p in self.pairings):
            return False
        if any(v is None for v in verdicts) or not self.lift_complete:
            return None
        return True

    def to_json(self) -> dict:
        return {
            'kind': self.kind,
            'dimension': self.dimension,
            'verdict': {True: 'pass', False: 'fail', None: 'inconclusive'}[self.verdict],
            'lift_complete': self.lift_complete,
            'certificates': {name: cert.to_json() for name, cert in self.certificates.items()},
            'pairings': [{'pair': list(p.pair), 'degree': p.degree, 'size': list(p.size), 'rank': p.rank}
                         for p in self.pairings],
            'notes': list(self.notes),
        }


def _underlying(operation: str, lift) -> Tuple[HochschildClass, bool, List[str]]:
    if isinstance(lift, NegativeCyclicClass):
        if lift.closed:
            return lift.underlying, True, []
        if lift.truncation_order is None:
            raise RefusalError(operation, "the class is not a negative cyclic cycle")
        return lift.underlying, False, [f"lift verified below order {lift.truncation_order}"]
    if isinstance(lift, HochschildClass):
        return lift, False, ["no negative cyclic lift supplied"]
    raise RefusalError(operation, f"expected a Hochschild or negative cyclic class, got {type(lift).__name__}")


def exact_weights(C: FiniteDgCategory, R: FreeBimodule) -> List[int]:
    """Weights in which A^! of a weight-cut resolution agrees with the uncut one."""
    top = max((C.weight(i) for i in range(len(C))), default=0)
    return list(range(max(2 * top - R.weight_bound, -R.weight_bound), 2 * top + 1))


@track_performance
def check_left_cy(C: FiniteDgCategory, lift, n: int = None, R: FreeBimodule = None,
                  weights: Sequence[int] = (0,)) -> CyReport:
    """
    Left n-Calabi-Yau check: Φ of the underlying Hochschild class is a
    quasi-isomorphism A^! → A[−n].

    A class given on a letter-cut bar complex of a weight-periodic category
    is first moved to the periodic arrow resolution. On a weight-cut
    resolution only the weights where the cut is invisible are certified.
    """
    z, complete, notes = _underlying("check_left_cy", lift)
    n = z.degree if n is None else n
    if z.degree != n:
        raise RefusalError("check_left_cy", f"class has degree {z.degree}, expected {n}")
    R = R if R is not None else bar_resolution(C)
    if C.weight_periodic and R.truncated_below:
        S = periodic_resolution(C)
        z = transport_class(z, R, S)
        notes = notes + [f"class moved from {R.name} to {S.name}"]
        R = S
    F = phi(C, z, R)
    if C.weight_periodic:
        cert = is_quasi_iso_periodic(F, R, weights)
    elif R.weight_bound is not None:
        if any(C.weight(m) + R.gen[key].weight for m, key in z.chain):
            raise RefusalError("check_left_cy", "a weight-cut resolution needs a class of weight 0")
        cert = is_quasi_iso(F, weights=exact_weights(C, R))
    else:
        cert = is_quasi_iso(F)
    report = CyReport('left', n, {'phi': cert}, complete, notes=notes)
    logger.info("Left Calabi-Yau check", category=C.name, dimension=n, verdict=report.verdict)
    return report


# ---------------------------------------------------------------------------
# right Calabi-Yau

def _check_functional(C: FiniteDgCategory, omega: Mapping[int, object], n: int) -> None:
    for i, v in omega.items():
        if not v:
            continue
        if C.src(i) != C.tgt(i):
            raise RefusalError("psi", f"functional is nonzero off the endomorphisms at {C.monomials[i].name}")
        if C.degree(i) != n:
            raise RefusalError("psi", f"functional is nonzero in degree {C.degree(i)}, expected {n}")

    def value(elem):
        total = C.field.zero
        for i, c in elem.items():
            total = total + c * omega.get(i, 0)
        return total

    for j in range(len(C)):
        if value(C.d(j)):
            raise RefusalError("psi", f"functional does not vanish on d({C.monomials[j].name})")
    for u in C.objects:
        for v in C.objects:
            for x in C.hom(u, v):
                for y in C.hom(v, u):
                    s = sign(C.degree(x) * C.degree(y))
                    if value(C.mul(x, y)) != s * value(C.mul(y, x)):
                        raise RefusalError("psi", "functional is not graded cyclic")


def psi(C: FiniteDgCategory, omega: Mapping[int, object], n: int) -> ExplicitMap:
    """
    Pairing with a closed cyclic functional ω: A → k[−n]:
    Ψ(ω): A[n] → A^*, m ↦ (m' ↦ ω(m·m')).
    """
    _check_functional(C, omega, n)

    def image(m):
        out = {}
        for m2 in C.hom(C.tgt(m), C.src(m)):
            val = C.field.zero
            for i, c in C.mul(m, m2).items():
                val = val + c * omega.get(i, 0)
            if val:
                out[('*', m2)] = val
        return out

    return ExplicitMap(DiagonalBimodule(C, n), LinearDual(C), image)


@track_performance
def check_right_cy(C: FiniteDgCategory, omega: Mapping[int, object], n: int) -> CyReport:
    """Right n-Calabi-Yau check: Ψ(ω) is a quasi-isomorphism A[n] → A^*."""
    cert = is_quasi_iso(psi(C, omega, n))
    report = CyReport('right', n, {'psi': cert})
    logger.info("Right Calabi-Yau check", category=C.name, dimension=n, verdict=report.verdict)
    return report


def functional_from_names(C: FiniteDgCategory, values: Mapping[str, object]) -> Dict[int, object]:
    """{monomial name: coefficient} → {monomial index: coefficient}."""
    return {C.index(name): C.field.coerce(v) for name, v in values.items()}


# ---------------------------------------------------------------------------
# perfect modules

class PerfectModule:
    """
    A bounded twisted complex ⊕_r e_{x_r}C[s_r] of representable right modules.

    ``twisting[(r, s)]`` is the component from summand s to summand r, left
    multiplication by an element of Hom(x_r, x_s) of degree 1 + s_r − s_s.
    Summand weights are fixed by the twisting so that every component is
    weight-homogeneous.
    """

    def __init__(self, category: FiniteDgCategory, summands: Sequence[Tuple[str, int]],
                 twisting: Mapping[Tuple[int, int], Mapping[int, object]] = None, name: str = ''):
        self.category = category
        self.summands = [(x, int(s)) for x, s in summands]
        self.twisting = {k: dict(v) for k, v in (twisting or {}).items() if v}
        self.name = name
        self._validate()
        self.weights = self._summand_weights()

    def __repr__(self):
        return f"PerfectModule({self.name!r}, summands={self.summands})"

    def _validate(self) -> None:
        C = self.category
        for x, _ in self.summands:
            if x not in C.objects:
                raise RefusalError("perfect module", f"unknown object {x!r}")
        for (r, s), elem in self.twisting.items():
            if not (0 <= r < len(self.summands) and 0 <= s < len(self.summands)):
                raise RefusalError("perfect module", f"twisting component {(r, s)} names no summand")
            (xr, sr), (xs, ss) = self.summands[r], self.summands[s]
            for m in elem:
                if (C.src(m), C.tgt(m)) != (xr, xs) or C.degree(m) != 1 + sr - ss:
                    raise RefusalError("perfect module",
                                       f"twisting component {(r, s)} has the wrong endpoints or degree")

    def _summand_weights(self) -> List[int]:
        C = self.category
        weights: List[Optional[int]] = [None] * len(self.summands)
        edges: Dict[int, List[Tuple[int, int]]] = {}
        for (r, s), elem in self.twisting.items():
            ws = {C.weight(m) for m in elem}
            if len(ws) > 1:
                raise RefusalError("perfect module", f"twisting component {(r, s)} is not weight-homogeneous")
            w = ws.pop()
            # weight(δ_{r s}) = ω_s − ω_r
            edges.setdefault(r, []).append((s, w))
            edges.setdefault(s, []).append((r, -w))
        for start in range(len(self.summands)):
            if weights[start] is not None:
                continue
            weights[start] = 0
            stack = [start]
            while stack:
                r = stack.pop()
                for s, w in edges.get(r, ()):
                    if weights[s] is None:
                        weights[s] = weights[r] + w
                        stack.append(s)
                    elif weights[s] != weights[r] + w:
                        raise RefusalError("perfect module", "twisting weights are inconsistent")
        return weights

    def d_label(self, label) -> Dict:
        """Differential of (t, n) ∈ P(v), n ∈ Hom(x_t, v)."""
        C = self.category
        t, n = label
        out: Dict = {}
        s = sign(self.summands[t][1])
        for m, c in C.d(n).items():
            _accumulate(out, (t, m), s * c)
        for (r, t2), elem in self.twisting.items():
            if t2 != t:
                continue
            for m, c in C.mul_vec(elem, {n: C.field.one}).items():
                _accumulate(out, (r, m), c)
        return out

    def degree_of(self, label) -> int:
        t, n = label
        return self.category.degree(n) - self.summands[t][1]

    def evaluate(self, v: str, weight: int = None) -> GradedComplex:
        """P(v) as a complex; with ``weight`` only the part of that total weight."""
        C = self.category
        labels = [(t, n) for t, (x, _) in enumerate(self.summands) for n in C.hom(x, v)
                  if weight is None or C.weight(n) + self.weights[t] == weight]
        return complex_from_basis(labels, self.degree_of, self.d_label, C.field)

    def supertrace(self) -> Dict[str, int]:
        """Σ_r (−1)^{s_r} [x_r] in K_0."""
        out: Dict[str, int] = {}
        for x, s in self.summands:
            out[x] = out.get(x, 0) + sign(s)
        return {x: c for x, c in out.items() if c}

    def shifted(self, k: int) -> 'PerfectModule':
        """P[k]: every summand shift grows by k, the twisting picks up (−1)^k."""
        s = sign(k)
        twisting = {rs: {m: s * c for m, c in elem.items()} for rs, elem in self.twisting.items()}
        return PerfectModule(self.category, [(x, sh + k) for x, sh in self.summands], twisting,
                             f"{self.name}[{k}]" if self.name else '')


def hom_complex(P: PerfectModule, Q: PerfectModule, weight: int = None) -> GradedComplex:
    """
    Hom_C(P, Q) with basis (r, (t, n)): generator r of P goes to (t, n) ∈ Q(x_r).

    d f = d_Q ∘ f − (−1)^{|f|} f ∘ d_P.
    """
    C = P.category

    def degree_of(lbl):
        r, q = lbl
        return Q.degree_of(q) + P.summands[r][1]

    def weight_of(lbl):
        r, (t, n) = lbl
        return C.weight(n) + Q.weights[t] - P.weights[r]

    def differential(lbl):
        r, q = lbl
        out: Dict = {}
        for q2, c in Q.d_label(q).items():
            _accumulate(out, (r, q2), c)
        s = -sign(degree_of(lbl))
        t, n = q
        for (r1, r2), elem in P.twisting.items():
            if r1 != r:
                continue
            for m, c in C.mul_vec({n: C.field.one}, elem).items():
                _accumulate(out, (r2, (t, m)), s * c)
        return out

    labels = [(r, (t, n)) for r, (x, _) in enumerate(P.summands)
              for t, (y, _) in enumerate(Q.summands) for n in C.hom(y, x)]
    if weight is not None:
        labels = [lbl for lbl in labels if weight_of(lbl) == weight]
    return complex_from_basis(labels, degree_of, differential, C.field)


def compose(g: Mapping, f: Mapping, category: FiniteDgCategory) -> Dict:
    """g ∘ f for f ∈ Hom(P, Q), g ∈ Hom(Q, R) given over hom_complex labels."""
    out: Dict = {}
    for (r, (t, n)), c in f.items():
        for (t2, (u, n2)), c2 in g.items():
            if t2 != t:
                continue
            for m, v in category.mul(n2, n).items():
                _accumulate(out, (r, (u, m)), c * c2 * v)
    return out


def _identity_word_trace(R: FreeBimodule, z: HochschildClass) -> Dict[str, object]:
    """c_x for a class Σ c_x 1_x⊗g_x carried by identity words, else RefusalError."""
    C = R.category
    out: Dict[str, object] = {}
    for (m, key), c in z.chain.items():
        g = R.gen[key]
        if not C.is_identity(m) or g.degree != 0 or g.left != g.right:
            raise RefusalError("induce_right_cy",
                               "the explicit pairing is transported only for classes carried by identity words")
        out[g.left] = out.get(g.left, C.field.zero) + c
    return out


def _pairing_matrix(P, Q, fs, gs, trace) -> SparseMatrix:
    C = P.category
    entries = {}
    for a, f in enumerate(fs):
        for b, g in enumerate(gs):
            total = C.field.zero
            for (r, (t, m)), c in compose(g, f, C).items():
                x, s = P.summands[r]
                if t == r and m == C.identity(x):
                    total = total + sign(s) * trace.get(x, 0) * c
            if total:
                entries[(a, b)] = total
    return SparseMatrix(len(fs), len(gs), entries, C.field)


@track_performance
def induce_right_cy(C: FiniteDgCategory, lift, n: int, modules: Sequence[PerfectModule],
                    R: FreeBimodule = None, weights: Sequence[int] = (0,)) -> CyReport:
    """
    Right Calabi-Yau structure induced on perfect modules by a left one.

    The left structure is checked first. Hom complexes between the modules
    are computed (per weight for weight-periodic categories); acyclic pairs
    pass trivially, the others need the explicit trace pairing of a class
    carried by identity words, which must be perfect in every degree.
    """
    left = check_left_cy(C, lift, n, R, weights)
    if left.verdict is False:
        raise RefusalError("induce_right_cy", "the left Calabi-Yau check failed")
    R = R if R is not None else bar_resolution(C)
    z = _underlying("induce_right_cy", lift)[0]
    ws = list(weights) if C.weight_periodic else [None]
    trace = None
    pairings: List[PairingCheck] = []
    notes = list(left.notes)
    for i, P in enumerate(modules):
        for j, Q in enumerate(modules):
            for w in ws:
                pq = hom_complex(P, Q, w)
                qp = hom_complex(Q, P, None if w is None else -w)
                h = homology_dims(pq)
                for k, dim in sorted(h.items()):
                    if not dim:
                        continue
                    if trace is None:
                        trace = _identity_word_trace(R, z)
                    fs = [{pq.labels[k][a]: v for a, v in vec.items()} for vec in homology_basis(pq, k)]
                    gs = [{qp.labels[-n - k][a]: v for a, v in vec.items()}
                          for vec in homology_basis(qp, -n - k)] if -n - k in qp.labels else []
                    M = _pairing_matrix(P, Q, fs, gs, trace)
                    pairings.append(PairingCheck((i, j), k, (len(fs), len(gs)), rank(M)))
    if not pairings:
        notes.append("all Hom complexes are acyclic")
    report = CyReport('induced-right', n, dict(left.certificates), left.lift_complete, pairings, notes)
    logger.info("Induced right Calabi-Yau check", category=C.name, modules=len(modules), verdict=report.verdict)
    return report
