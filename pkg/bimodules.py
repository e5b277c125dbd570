"""
Bimodule complexes over compiled dg categories.

A free bimodule is generated by symbols g sitting at an object pair
(x_g, y_g) with a level (term index) and an internal shift; its value on
(u, v) is ⊕_g Hom(u, x_g) ⊗ Hom(y_g, v). Elements are sparse dicts keyed by
(a, g, b) with a, b monomial indices. The differential is determined by

    D(g) = Σ c · a ⊗ h ⊗ b,   a: x_g → x_h,  b: y_h → y_g,

    d(a⊗g⊗b) = da⊗g⊗b + (−1)^{|a|} a·D(g)·b + (−1)^{|a|+|g|} a⊗g⊗db.

Every construction is checked (d² = 0, chain-map identities) before it is
returned. Signs are collected in docs/signs.md.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Hashable, Iterable, List, Mapping, Sequence, Tuple

from cykit_config import get_settings
from dgcore import FiniteDgCategory, DgFunctor, compile, is_identity_path, path_category, _accumulate
from errors import IntegrityError, RefusalError
from exactla import ChainMap, GradedComplex, SparseMatrix, solve
from monitoring import logger, track_performance

Term = Tuple[object, int, Hashable, int]
Element = Dict[Tuple[int, Hashable, int], object]

DEFAULT_WINDOW_LETTERS = 3


def sign(k: int) -> int:
    return -1 if k % 2 else 1


def scalar(field, s):
    """Coerce an int, Fraction or field element into ``field``."""
    if isinstance(s, Fraction):
        return field.from_pair(s.numerator, s.denominator)
    return field.coerce(s)


def _tau(m: int) -> int:
    return (m * (m + 1) // 2) % 2


@dataclass(frozen=True)
class Generator:
    key: Hashable
    left: str
    right: str
    level: int
    shift: int = 0
    weight: int = 0

    @property
    def degree(self) -> int:
        return self.level + self.shift


def _empty_complex(field) -> GradedComplex:
    return GradedComplex(0, 0, {0: 0}, field=field)


def complex_from_basis(labels: Sequence[Hashable], degree_of, differential, field,
                       pad: int = 1, truncated_below=False, truncated_above=False) -> GradedComplex:
    """
    Assemble a GradedComplex from a labelled basis.

    ``differential(label)`` returns a sparse dict over labels; components
    outside the basis are an integrity failure.
    """
    by_deg: Dict[int, List[Hashable]] = {}
    for lbl in labels:
        by_deg.setdefault(degree_of(lbl), []).append(lbl)
    if not by_deg:
        return GradedComplex(-pad, pad, {}, field=field)
    lo, hi = min(by_deg) - pad, max(by_deg) + pad
    pos = {lbl: (k, i) for k, lst in by_deg.items() for i, lbl in enumerate(lst)}
    d = {}
    for k in range(lo, hi):
        src = by_deg.get(k, [])
        entries = {}
        for col, lbl in enumerate(src):
            for out, v in differential(lbl).items():
                where = pos.get(out)
                if where is None or where[0] != k + 1:
                    raise IntegrityError(f"differential of {lbl!r} leaves the basis", k)
                entries[(where[1], col)] = v
        d[k] = SparseMatrix(len(by_deg.get(k + 1, [])), len(src), entries, field)
    return GradedComplex(lo, hi, {k: len(v) for k, v in by_deg.items()}, d, field,
                         truncated_below=truncated_below, truncated_above=truncated_above,
                         labels=by_deg)


def label_index(c: GradedComplex) -> Dict[Hashable, Tuple[int, int]]:
    return {lbl: (k, i) for k, lst in c.labels.items() for i, lbl in enumerate(lst)}


def chain_map_from_labels(source: GradedComplex, target: GradedComplex, image) -> ChainMap:
    """ChainMap whose column for a source label is ``image(label)`` over target labels."""
    where = label_index(target)
    comps = {}
    for k, lst in source.labels.items():
        entries = {}
        for col, lbl in enumerate(lst):
            for out, v in image(lbl).items():
                pos = where.get(out)
                if pos is None or pos[0] != k:
                    raise IntegrityError(f"map sends {lbl!r} outside the target basis", k)
                entries[(pos[1], col)] = v
        comps[k] = SparseMatrix(target.dim(k), source.dim(k), entries, source.field)
    return ChainMap(source, target, comps)


class Bimodule:
    """Common interface: per-pair bases, differential and the two actions."""

    category: FiniteDgCategory
    name = ''

    @property
    def field(self):
        return self.category.field

    def basis(self, u: str, v: str, weight: int = None) -> List[Hashable]:
        raise NotImplementedError

    def degree_of(self, label) -> int:
        raise NotImplementedError

    def d_elem(self, elem: Mapping) -> Dict:
        raise NotImplementedError

    def act(self, a: int, elem: Mapping, b: int) -> Dict:
        raise NotImplementedError

    def piece(self, u: str, v: str, weight: int = None) -> GradedComplex:
        labels = self.basis(u, v, weight)
        return complex_from_basis(labels, self.degree_of, lambda lbl: self.d_elem({lbl: self.field.one}),
                                  self.field)


class DiagonalBimodule(Bimodule):
    """The diagonal bimodule (u, v) ↦ Hom(u, v)."""

    def __init__(self, category: FiniteDgCategory, shift: int = 0):
        self.category = category
        self.shift = shift
        self.name = f"{category.name}[{shift}]" if shift else category.name

    def basis(self, u, v, weight=None):
        return [i for i in self.category.hom(u, v) if weight is None or self.category.weight(i) == weight]

    def degree_of(self, label):
        return self.category.degree(label) - self.shift

    def d_elem(self, elem):
        s = sign(self.shift)
        return {k: s * v for k, v in self.category.d_vec(elem).items()}

    def act(self, a, elem, b):
        cat = self.category
        s = sign(cat.degree(a) * self.shift)
        out = cat.mul_vec(cat.mul_vec({a: cat.field.one}, elem), {b: cat.field.one})
        return {k: s * v for k, v in out.items()}


class LinearDual(Bimodule):
    """
    The k-linear dual A^*: A^*(u, v) = Hom(v, u)^*, labels ('*', i).

    (a·φ·b)(m) = (−1)^{|a|(|φ|+|b|+|m|)} φ(b·m·a).
    """

    def __init__(self, category: FiniteDgCategory):
        if not category.nilpotent_radical and category.truncated:
            logger.warning("Linear dual of a truncated category", category=category.name)
        self.category = category
        self.truncated = category.truncated
        self.name = f"{category.name}^*"

    def basis(self, u, v, weight=None):
        return [('*', i) for i in self.category.hom(v, u)
                if weight is None or -self.category.weight(i) == weight]

    def degree_of(self, label):
        return -self.category.degree(label[1])

    def d_elem(self, elem):
        cat = self.category
        out = {}
        for (_, i), c in elem.items():
            deg_phi = -cat.degree(i)
            for j in cat.hom(cat.src(i), cat.tgt(i)):
                v = cat.d(j).get(i)
                if v:
                    _accumulate(out, ('*', j), -sign(deg_phi) * c * v)
        return out

    def act(self, a, elem, b):
        cat = self.category
        out = {}
        for (_, i), c in elem.items():
            deg_phi = -cat.degree(i)
            # m runs over Hom(tgt b, src a); coefficient of i in b·m·a
            for m in cat.hom(cat.tgt(b), cat.src(a)):
                prod = cat.mul_vec(cat.mul_vec({b: cat.field.one}, {m: cat.field.one}), {a: cat.field.one})
                v = prod.get(i)
                if v:
                    s = sign(cat.degree(a) * (deg_phi + cat.degree(b) + cat.degree(m)))
                    _accumulate(out, ('*', m), s * c * v)
        return out


def k_linear_dual(C: FiniteDgCategory) -> LinearDual:
    """A^* as an explicit bimodule with transposed actions."""
    return LinearDual(C)


class FreeBimodule(Bimodule):
    """
    A bounded complex of free bimodules.

    ``D`` maps a generator key to a list of terms (c, a, h, b). ``augmentation``
    optionally maps keys to elements of the diagonal (for resolutions).
    """

    def __init__(self, category: FiniteDgCategory, generators: Iterable[Generator],
                 D: Mapping[Hashable, Sequence[Term]] = None, name: str = '', kind: str = 'free',
                 augmentation: Mapping[Hashable, Mapping[int, object]] = None,
                 truncated_below: bool = False, validate: bool = True, weight_bound: int = None):
        self.category = category
        self.generators: List[Generator] = list(generators)
        self.gen = {g.key: g for g in self.generators}
        if len(self.gen) != len(self.generators):
            raise IntegrityError("duplicate generator keys")
        self.D: Dict[Hashable, List[Term]] = {k: list(v) for k, v in (D or {}).items() if v}
        self.name = name
        self.kind = kind
        self.augmentation = {k: dict(v) for k, v in (augmentation or {}).items() if v}
        self.truncated_below = truncated_below
        self.weight_bound = weight_bound
        if validate:
            self.check()

    def __repr__(self):
        return f"FreeBimodule({self.name!r}, generators={len(self.generators)})"

    @property
    def terms(self) -> Dict[int, List[Tuple[str, str, int]]]:
        """level -> list of (left object, right object, internal shift)"""
        out: Dict[int, List[Tuple[str, str, int]]] = {}
        for g in self.generators:
            out.setdefault(g.level, []).append((g.left, g.right, g.shift))
        return dict(sorted(out.items()))

    def rank(self, level: int = None) -> int:
        return sum(1 for g in self.generators if level is None or g.level == level)

    def D_elem(self, key) -> Element:
        out: Element = {}
        for c, a, h, b in self.D.get(key, ()):
            _accumulate(out, (a, h, b), c)
        return out

    def generator_elem(self, key) -> Element:
        g = self.gen[key]
        cat = self.category
        return {(cat.identity(g.left), key, cat.identity(g.right)): cat.field.one}

    def degree_of(self, label) -> int:
        a, key, b = label
        cat = self.category
        return cat.degree(a) + self.gen[key].degree + cat.degree(b)

    def weight_of(self, label) -> int:
        a, key, b = label
        cat = self.category
        return cat.weight(a) + self.gen[key].weight + cat.weight(b)

    def act(self, a, elem, b) -> Element:
        cat = self.category
        out: Element = {}
        for (a1, h, b1), c in elem.items():
            for k1, v1 in cat.mul(a, a1).items():
                for k2, v2 in cat.mul(b1, b).items():
                    _accumulate(out, (k1, h, k2), c * v1 * v2)
        return out

    def d_elem(self, elem) -> Element:
        cat = self.category
        out: Element = {}
        for (a, key, b), coef in elem.items():
            for a2, c in cat.d(a).items():
                _accumulate(out, (a2, key, b), coef * c)
            s = sign(cat.degree(a))
            for (a1, h, b1), c in self.D_elem(key).items():
                for k1, v1 in cat.mul(a, a1).items():
                    for k2, v2 in cat.mul(b1, b).items():
                        _accumulate(out, (k1, h, k2), s * coef * c * v1 * v2)
            s2 = sign(cat.degree(a) + self.gen[key].degree)
            for b2, c in cat.d(b).items():
                _accumulate(out, (a, key, b2), s2 * coef * c)
        return out

    def check(self) -> None:
        """Positions and degrees of every D-term, then D² = 0 on generators."""
        cat = self.category
        for g in self.generators:
            for c, a, h, b in self.D.get(g.key, ()):
                if h not in self.gen:
                    raise IntegrityError(f"D({g.key!r}) references unknown generator {h!r}")
                gh = self.gen[h]
                if (cat.src(a), cat.tgt(a), cat.src(b), cat.tgt(b)) != (g.left, gh.left, gh.right, g.right):
                    raise IntegrityError(f"D({g.key!r}) has a term at the wrong objects", g.degree)
                if cat.degree(a) + gh.degree + cat.degree(b) != g.degree + 1:
                    raise IntegrityError(f"D({g.key!r}) is not of degree +1", g.degree)
            if self.d_elem(self.D_elem(g.key)):
                raise IntegrityError(f"d∘d ≠ 0 on generator {g.key!r}", g.degree)
        if self.augmentation:
            diag = DiagonalBimodule(cat)
            aug = FreeMap(self, diag, self.augmentation, validate=False)
            aug.check()

    def basis(self, u, v, weight=None, radius=None) -> List[Tuple[int, Hashable, int]]:
        cat = self.category
        out = []
        for g in self.generators:
            for a in cat.hom(u, g.left):
                if radius is not None and abs(cat.weight(a)) > radius:
                    continue
                for b in cat.hom(g.right, v):
                    if radius is not None and abs(cat.weight(b)) > radius:
                        continue
                    if weight is not None and cat.weight(a) + g.weight + cat.weight(b) != weight:
                        continue
                    out.append((a, g.key, b))
        return out

    def piece(self, u, v, weight=None) -> GradedComplex:
        labels = self.basis(u, v, weight)
        return complex_from_basis(labels, self.degree_of, lambda lbl: self.d_elem({lbl: self.field.one}),
                                  self.field, truncated_below=self.truncated_below)

    def shifted(self, k: int) -> 'FreeBimodule':
        """R[k]: every generator degree drops by k."""
        gens = [Generator(g.key, g.left, g.right, g.level - k, g.shift, g.weight) for g in self.generators]
        s = sign(k)
        D = {key: [(s * c, a, h, b) for c, a, h, b in terms] for key, terms in self.D.items()}
        return FreeBimodule(self.category, gens, D, name=f"{self.name}[{k}]", kind=self.kind,
                            truncated_below=self.truncated_below, weight_bound=self.weight_bound)

    def dependency_order(self) -> List[Hashable]:
        """Generator keys such that D(g) only references earlier keys."""
        done, order, visiting = set(), [], set()

        def visit(key):
            if key in done:
                return
            if key in visiting:
                raise RefusalError("dependency_order", f"cyclic dependency at generator {key!r}")
            visiting.add(key)
            for _, _, h, _ in self.D.get(key, ()):
                visit(h)
            visiting.discard(key)
            done.add(key)
            order.append(key)

        for g in self.generators:
            visit(g.key)
        return order


class FreeMap:
    """
    A degree-0 bimodule map out of a free bimodule, given on generators:
    F(a⊗g⊗b) = a·F(g)·b.
    """

    def __init__(self, source: FreeBimodule, target: Bimodule, images: Mapping[Hashable, Mapping],
                 validate: bool = True):
        self.source, self.target = source, target
        self.images = {k: dict(v) for k, v in images.items() if v}
        if validate:
            self.check()

    def apply(self, elem: Mapping) -> Dict:
        out: Dict = {}
        for (a, key, b), c in elem.items():
            img = self.images.get(key)
            if not img:
                continue
            for lbl, v in self.target.act(a, img, b).items():
                _accumulate(out, lbl, c * v)
        return out

    def check(self) -> None:
        for g in self.source.generators:
            img = self.images.get(g.key, {})
            for lbl in img:
                if self.target.degree_of(lbl) != g.degree:
                    raise IntegrityError(f"image of {g.key!r} is not homogeneous of degree {g.degree}")
            if self.target.d_elem(img) != self.apply(self.source.D_elem(g.key)):
                raise IntegrityError(f"chain-map identity fails on generator {g.key!r}", g.degree)

    def scaled(self, s) -> 'FreeMap':
        s = scalar(self.source.field, s)
        return FreeMap(self.source, self.target,
                       {k: {lbl: s * v for lbl, v in img.items()} for k, img in self.images.items()},
                       validate=False)

    def piece(self, u: str, v: str, weight: int = None) -> ChainMap:
        src = self.source.piece(u, v, weight)
        tgt = self.target.piece(u, v, weight)
        return chain_map_from_labels(src, tgt, lambda lbl: self.apply({lbl: self.source.field.one}))


# ---------------------------------------------------------------------------
# resolutions of the diagonal

def _has_cycle(C: FiniteDgCategory) -> bool:
    edges: Dict[str, set] = {o: set() for o in C.objects}
    for m in C.monomials:
        if not m.is_identity:
            if m.src == m.tgt:
                return True
            edges[m.src].add(m.tgt)
    state: Dict[str, int] = {}

    def visit(x):
        state[x] = 1
        for y in edges[x]:
            if state.get(y) == 1 or (y not in state and visit(y)):
                return True
        state[x] = 2
        return False

    return any(visit(x) for x in C.objects if x not in state)


def _chain_mode(C: FiniteDgCategory, lowest_degree, weight_bound, max_letters):
    """
    How composable chains are bounded: ('finite',), ('degree', lo),
    ('weight', bound) or ('window', letters).
    """
    if not _has_cycle(C):
        return ('finite',)
    radical = [m.index for m in C.monomials if not m.is_identity]
    if not any(C.degree(i) > 0 for i in radical):
        if lowest_degree is None:
            raise RefusalError("bar_resolution", "composable chains are unbounded and no degree window was given")
        return ('degree', lowest_degree)
    if all(C.weight(i) >= 1 for i in radical):
        bound = weight_bound if weight_bound is not None else get_settings().weight_window[1]
        return ('weight', bound)
    if C.weight_window is not None:
        return ('window', max_letters if max_letters is not None else DEFAULT_WINDOW_LETTERS)
    raise RefusalError("bar_resolution",
                       "chains are unbounded in a fixed degree (a cyclic monomial has degree > 0 and no weight bounds it)")


def composable_chains(C: FiniteDgCategory, lowest_degree: int = None, weight_bound: int = None,
                      max_letters: int = None) -> Tuple[List[Tuple[int, ...]], bool]:
    """
    All chains [a1|…|ap] (p ≥ 1) of composable non-identity monomials.

    Finite when the monomials form no cycle. Otherwise chains are cut:

    * at total degree Σ(|a_i| − 1) ≥ lowest_degree when no cyclic monomial
      has positive degree;
    * at total weight ≤ weight_bound when every monomial has weight ≥ 1
      (exact in every weight up to the bound);
    * to at most max_letters letters whose contiguous weight sums all stay
      in the category's weight window (closed under the bar differential,
      reported as truncated).

    Returns:
        (chains, truncated)
    """
    mode = _chain_mode(C, lowest_degree, weight_bound, max_letters)
    radical = [m.index for m in C.monomials if not m.is_identity]
    starting: Dict[str, List[int]] = {}
    for i in radical:
        starting.setdefault(C.src(i), []).append(i)
    lo, hi = C.weight_window or (None, None)

    def admissible(chain, deg):
        if mode[0] == 'degree':
            return deg >= mode[1]
        if mode[0] == 'weight':
            return sum(C.weight(a) for a in chain) <= mode[1]
        if mode[0] == 'window':
            if len(chain) > mode[1]:
                return False
            total = 0
            for a in reversed(chain):
                total += C.weight(a)
                if not lo <= total <= hi:
                    return False
        return True

    chains: List[Tuple[int, ...]] = []
    truncated = mode[0] == 'window'
    stack = [((i,), C.degree(i) - 1) for i in reversed(radical)]
    while stack:
        chain, deg = stack.pop()
        if not admissible(chain, deg):
            truncated = truncated or mode[0] == 'degree'
            continue
        chains.append(chain)
        for j in reversed(starting.get(C.tgt(chain[-1]), [])):
            stack.append((chain + (j,), deg + C.degree(j) - 1))
    chains.sort(key=lambda c: (len(c), c))
    return chains, truncated


@track_performance
def bar_resolution(C: FiniteDgCategory, degree_window: Tuple[int, int] = None, weight_bound: int = None,
                   max_letters: int = None) -> FreeBimodule:
    """
    The two-sided reduced normalized bar resolution of the diagonal.

    Generator [a1|…|ap] sits at (src a1, tgt ap) in level −p with internal
    shift Σ|a_i|. Identity components of products are dropped. Cyclic
    categories are cut as described in ``composable_chains``; a weight cut
    is recorded on the result as ``weight_bound``.
    """
    lo = degree_window[0] if degree_window else None
    mode = _chain_mode(C, lo, weight_bound, max_letters)
    chains, truncated = composable_chains(C, lo, weight_bound, max_letters)
    one = C.field.one
    gens = [Generator((x, ()), x, x, 0, 0, 0) for x in C.objects]
    for ch in chains:
        gens.append(Generator((C.src(ch[0]), ch), C.src(ch[0]), C.tgt(ch[-1]), -len(ch),
                              sum(C.degree(a) for a in ch), sum(C.weight(a) for a in ch)))
    present = {g.key for g in gens}

    def key_of(ch):
        return (C.src(ch[0]), ch)

    D: Dict[Hashable, List[Term]] = {}
    for g in gens:
        ch = g.key[1]
        if not ch:
            continue
        p = len(ch)
        e = [C.degree(a) - 1 for a in ch]
        terms: List[Term] = []
        rest = ch[1:]
        first = key_of(rest) if rest else (C.tgt(ch[0]), ())
        terms.append((one, ch[0], first, C.identity(g.right)))
        for i in range(p - 1):
            s = sign(sum(e[:i + 1]))
            for k, v in C.mul(ch[i], ch[i + 1]).items():
                if C.is_identity(k):
                    continue
                new = ch[:i] + (k,) + ch[i + 2:]
                if key_of(new) in present:
                    terms.append((s * v, C.identity(g.left), key_of(new), C.identity(g.right)))
        for i in range(p):
            s = -sign(sum(e[:i]))
            for k, v in C.d(ch[i]).items():
                if C.is_identity(k):
                    continue
                new = ch[:i] + (k,) + ch[i + 1:]
                terms.append((s * v, C.identity(g.left), key_of(new), C.identity(g.right)))
        last = key_of(ch[:-1]) if p > 1 else (C.src(ch[0]), ())
        terms.append((-sign(sum(e[:-1])), C.identity(g.left), last, ch[-1]))
        D[g.key] = terms
    aug = {(x, ()): {C.identity(x): one} for x in C.objects}
    R = FreeBimodule(C, gens, D, name=f"Bar({C.name})", kind='bar', augmentation=aug,
                     truncated_below=truncated, weight_bound=mode[1] if mode[0] == 'weight' else None)
    logger.debug("Bar resolution built", category=C.name, generators=len(gens), truncated=truncated,
                 cut=mode[0])
    return R


def arrow_resolution(C: FiniteDgCategory, arrows: Sequence[str] = None) -> FreeBimodule:
    """
    The two-term resolution g_x (level 0), g_a (level −1) with
    D(g_a) = a⊗g_tgt⊗1 − 1⊗g_src⊗a.

    A resolution for free path categories and, listing only t, for Laurent
    categories k[t, t^-1]. The differential of C must vanish.
    """
    if C.has_differential:
        raise RefusalError("arrow_resolution", "the category has a nonzero differential")
    if C.presentation is None:
        raise RefusalError("arrow_resolution", "the category has no presentation")
    names = list(arrows) if arrows is not None else [a.name for a in C.presentation.arrows]
    one = C.field.one
    gens = [Generator(('obj', x), x, x, 0) for x in C.objects]
    D = {}
    for name in names:
        a = C.index(name)
        src, tgt = C.src(a), C.tgt(a)
        gens.append(Generator(('arr', name), src, tgt, -1, C.degree(a), C.weight(a)))
        D[('arr', name)] = [(one, a, ('obj', tgt), C.identity(tgt)),
                            (-one, C.identity(src), ('obj', src), a)]
    aug = {('obj', x): {C.identity(x): one} for x in C.objects}
    return FreeBimodule(C, gens, D, name=f"Arr({C.name})", kind='arrow', augmentation=aug)


def periodic_resolution(C: FiniteDgCategory) -> FreeBimodule:
    """Arrow resolution on the positive-weight arrows of a weight-periodic category."""
    if C.presentation is None:
        raise RefusalError("periodic_resolution", "no presentation to read arrows from")
    if not C.weight_periodic:
        raise RefusalError("periodic_resolution", f"{C.name} is not weight-periodic")
    return arrow_resolution(C, [a.name for a in C.presentation.arrows if a.weight > 0])


def is_quadratic_monomial(C: FiniteDgCategory) -> bool:
    """True for presentations whose relations are single paths of length 2 and without differential."""
    p = C.presentation
    if p is None or C.has_differential or p.differential:
        return False
    return all(len(rel) == 1 and len(rel[0][1]) == 2 and not is_identity_path(rel[0][1]) for rel in p.relations)


@track_performance
def koszul_resolution(C: FiniteDgCategory, weight_bound: int = None) -> FreeBimodule:
    """
    The Koszul bimodule resolution of a quadratic monomial category.

    Generators are the objects and the arrow words a1…ap in which every
    consecutive pair is a relation, keyed like bar chains. The differential
    is the bar differential without merges (all merges vanish):

        D[a1|…|ap] = a1⊗[a2|…|ap]⊗1 − (−1)^{E_{p−1}} 1⊗[a1|…|a_{p−1}]⊗ap.

    When relation words cycle every arrow must have weight ≥ 1 and words are
    cut at total weight ``weight_bound``.
    """
    if not is_quadratic_monomial(C):
        raise RefusalError("koszul_resolution", "relations are not quadratic monomials")
    p = C.presentation
    follows: Dict[str, List[str]] = {}
    for rel in p.relations:
        first, second = rel[0][1]
        follows.setdefault(first, []).append(second)
    letters = {a.name: C.index(a.name) for a in p.arrows}
    bound = None
    if _has_relation_cycle(follows):
        if any(a.weight < 1 for a in p.arrows):
            raise RefusalError("koszul_resolution", "relation words are unbounded and some arrow has weight < 1")
        bound = weight_bound if weight_bound is not None else get_settings().weight_window[1]
    words: List[Tuple[str, ...]] = []
    stack = [(a.name,) for a in reversed(p.arrows)]
    while stack:
        w = stack.pop()
        if bound is not None and sum(p.arrow(x).weight for x in w) > bound:
            continue
        words.append(w)
        for nxt in reversed(follows.get(w[-1], [])):
            stack.append(w + (nxt,))
    words.sort(key=lambda w: (len(w), w))
    one = C.field.one
    gens = [Generator((x, ()), x, x, 0, 0, 0) for x in C.objects]
    D: Dict[Hashable, List[Term]] = {}
    for w in words:
        ch = tuple(letters[x] for x in w)
        key = (C.src(ch[0]), ch)
        gens.append(Generator(key, C.src(ch[0]), C.tgt(ch[-1]), -len(ch),
                              sum(C.degree(a) for a in ch), sum(C.weight(a) for a in ch)))
        e = [C.degree(a) - 1 for a in ch]
        first = (C.src(ch[1]), ch[1:]) if len(ch) > 1 else (C.tgt(ch[0]), ())
        last = (C.src(ch[0]), ch[:-1]) if len(ch) > 1 else (C.src(ch[0]), ())
        D[key] = [(one, ch[0], first, C.identity(C.tgt(ch[-1]))),
                  (-sign(sum(e[:-1])), C.identity(C.src(ch[0])), last, ch[-1])]
    aug = {(x, ()): {C.identity(x): one} for x in C.objects}
    R = FreeBimodule(C, gens, D, name=f"Kos({C.name})", kind='koszul', augmentation=aug, weight_bound=bound)
    logger.debug("Koszul resolution built", category=C.name, generators=len(gens), weight_bound=bound)
    return R


def _has_relation_cycle(follows: Mapping[str, Sequence[str]]) -> bool:
    state: Dict[str, int] = {}

    def visit(a):
        state[a] = 1
        for b in follows.get(a, ()):
            if state.get(b) == 1 or (b not in state and visit(b)):
                return True
        state[a] = 2
        return False

    return any(visit(a) for a in list(follows) if a not in state)


def small_resolution_An(n: int, field=None) -> FreeBimodule:
    """⊕ S e_i ⊗ e_{i+1} S → ⊕ S e_i ⊗ e_i S for the A_n path category."""
    C = compile(path_category(n)) if field is None else compile(path_category(n), field=field)
    return arrow_resolution(C)


def augmentation_map(R: FreeBimodule) -> FreeMap:
    if not R.augmentation and R.generators:
        raise RefusalError("augmentation_map", f"{R.name} carries no augmentation")
    return FreeMap(R, DiagonalBimodule(R.category), R.augmentation)


# ---------------------------------------------------------------------------
# tensor products

def _tensor_terms(R: FreeBimodule, m: int, key):
    """Yield (coef, monomial, h) for Σ c (−1)^{|b|(|m|+|a|+|h|)} (b·m·a) ⊗ h over D(key)."""
    C = R.category
    dm = C.degree(m)
    for c, a, h, b in R.D.get(key, ()):
        s = sign(C.degree(b) * (dm + C.degree(a) + R.gen[h].degree))
        for k1, v1 in C.mul(b, m).items():
            for k2, v2 in C.mul(k1, a).items():
                yield s * c * v1 * v2, k2, h


def tensor_basis(R: FreeBimodule, weight: int = None, max_weight: int = None) -> List[Tuple[int, Hashable]]:
    C = R.category
    out = []
    for g in R.generators:
        for m in C.hom(g.right, g.left):
            w = C.weight(m) + g.weight
            if (weight is None or w == weight) and (max_weight is None or w <= max_weight):
                out.append((m, g.key))
    return out


@track_performance
def tensor_with_diagonal(R: FreeBimodule, weight: int = None, max_weight: int = None) -> GradedComplex:
    """
    R ⊗_{C^e} C with basis m ⊗ g, m ∈ Hom(y_g, x_g):

        d(m⊗g) = dm⊗g + (−1)^{|m|} Σ c (−1)^{|b|(|m|+|a|+|h|)} (b·m·a) ⊗ h.
    """
    C = R.category

    def degree_of(lbl):
        m, key = lbl
        return C.degree(m) + R.gen[key].degree

    def differential(lbl):
        m, key = lbl
        out = {}
        for k, v in C.d(m).items():
            _accumulate(out, (k, key), v)
        s = sign(C.degree(m))
        for c, k, h in _tensor_terms(R, m, key):
            _accumulate(out, (k, h), s * c)
        return out

    return complex_from_basis(tensor_basis(R, weight, max_weight), degree_of, differential, C.field,
                              truncated_below=R.truncated_below)


def tensor_map_with_diagonal(F: 'FreeMap', source: GradedComplex, target: GradedComplex) -> ChainMap:
    """F ⊗_{C^e} C between the tensor complexes of two free bimodules."""
    R, T = F.source, F.target
    C = R.category

    def image(lbl):
        m, key = lbl
        out = {}
        for (a, h, b), c in F.images.get(key, {}).items():
            s = sign(C.degree(b) * (C.degree(m) + C.degree(a) + T.gen[h].degree))
            for k1, v1 in C.mul(b, m).items():
                for k2, v2 in C.mul(k1, a).items():
                    _accumulate(out, (k2, h), s * c * v1 * v2)
        return out

    return chain_map_from_labels(source, target, image)


def tensor_over(M: Bimodule, N: Bimodule) -> Bimodule:
    """
    M ⊗_C N for free bimodules; the diagonal is a unit on either side.

    Generators (g, m, h) with m ∈ Hom(y_g, x_h).
    """
    if isinstance(M, DiagonalBimodule) and M.shift == 0:
        return N
    if isinstance(N, DiagonalBimodule) and N.shift == 0:
        return M
    if not (isinstance(M, FreeBimodule) and isinstance(N, FreeBimodule)):
        raise RefusalError("tensor_over", "one side must be free; resolve the module first")
    C = M.category
    one = C.field.one
    gens, D = [], {}
    for g in M.generators:
        for h in N.generators:
            for m in C.hom(g.right, h.left):
                gens.append(Generator((g.key, m, h.key), g.left, h.right, g.level + h.level,
                                      g.shift + h.shift + C.degree(m), g.weight + h.weight + C.weight(m)))
    present = {x.key for x in gens}
    for x in gens:
        gk, m, hk = x.key
        g, h = M.gen[gk], N.gen[hk]
        terms: List[Term] = []
        for c, a, g2, b in M.D.get(gk, ()):
            for k, v in C.mul(b, m).items():
                terms.append((c * v, a, (g2, k, hk), C.identity(h.right)))
        for k, v in C.d(m).items():
            terms.append((sign(g.degree) * v, C.identity(g.left), (gk, k, hk), C.identity(h.right)))
        for c, a, h2, b in N.D.get(hk, ()):
            for k, v in C.mul(m, a).items():
                terms.append((sign(g.degree + C.degree(m)) * c * v, C.identity(g.left), (gk, k, h2), b))
        D[x.key] = [t for t in terms if t[2] in present]
    return FreeBimodule(C, gens, D, name=f"{M.name}⊗{N.name}")


# ---------------------------------------------------------------------------
# duals

def dual_key(key):
    return ('^', key)


def _dual_sign(C: FiniteDgCategory, a: int, b: int, g_deg: int, h_deg: int) -> int:
    da, db = C.degree(a), C.degree(b)
    return sign(da * db + da * (g_deg + h_deg) + h_deg + _tau(g_deg) + _tau(h_deg))


@track_performance
def hom_into_enveloping(R: Bimodule) -> FreeBimodule:
    """
    Hom_{C^e}(R, C^e) for free R.

    g^∨ sits at (y_g, x_g) with level −level, shift −shift, weight −weight;
    D^∨(h^∨) = Σ_{D(g) ∋ c a⊗h⊗b} ±c b ⊗ g^∨ ⊗ a with the sign of docs/signs.md.
    """
    if not isinstance(R, FreeBimodule):
        raise RefusalError("hom_into_enveloping", "explicit terms have no free dual; resolve first")
    C = R.category
    gens = [Generator(dual_key(g.key), g.right, g.left, -g.level, -g.shift, -g.weight) for g in R.generators]
    D: Dict[Hashable, List[Term]] = {}
    for g in R.generators:
        for c, a, h, b in R.D.get(g.key, ()):
            s = _dual_sign(C, a, b, g.degree, R.gen[h].degree)
            D.setdefault(dual_key(h), []).append((s * c, b, dual_key(g.key), a))
    return FreeBimodule(C, gens, D, name=f"{R.name}^!", kind='dual')


def dual_map(F: FreeMap, source_dual: FreeBimodule, target_dual: FreeBimodule) -> FreeMap:
    """
    F^!: T^∨ → R^∨ for a free map F: R → T,

        F^!(h^∨) = Σ_{F(g) ∋ c a⊗h⊗b} (−1)^{|a||b| + |a|(|g|+|h|) + τ(|g|) + τ(|h|)} c b⊗g^∨⊗a.
    """
    R, T = F.source, F.target
    C = R.category
    images: Dict[Hashable, Element] = {}
    for g in R.generators:
        for (a, h, b), c in F.images.get(g.key, {}).items():
            da, db = C.degree(a), C.degree(b)
            dh = T.gen[h].degree
            s = sign(da * db + da * (g.degree + dh) + _tau(g.degree) + _tau(dh))
            _accumulate(images.setdefault(dual_key(h), {}), (b, dual_key(g.key), a), s * c)
    return FreeMap(target_dual, source_dual, images)


# ---------------------------------------------------------------------------
# cones and lifts

def free_cone(F: FreeMap) -> FreeBimodule:
    """cone(F: R → T) with T's generators and g⁺ for each g of R (one level lower)."""
    R, T = F.source, F.target
    if not isinstance(T, FreeBimodule):
        raise RefusalError("free_cone", "the target must be free")
    C = R.category
    gens = list(T.generators)
    gens += [Generator(('+', g.key), g.left, g.right, g.level - 1, g.shift, g.weight) for g in R.generators]
    D = {k: list(v) for k, v in T.D.items()}
    for g in R.generators:
        terms = [(-sign(C.degree(a)) * c, a, ('+', h), b) for c, a, h, b in R.D.get(g.key, ())]
        terms += [(c, a, h, b) for (a, h, b), c in F.images.get(g.key, {}).items()]
        D[('+', g.key)] = terms
    return FreeBimodule(C, gens, D, name=f"cone({R.name}→{T.name})")


def lift_map(F: FreeMap, R: FreeBimodule, radius: int = None) -> FreeMap:
    """
    Lift F: S → C[k] through the augmentation R[k] → C[k].

    Generators of S are processed so that D(G) only involves lifted ones; each
    step solves ε(x) = F(G), d x = F̃(D G) exactly.

    Raises:
        RefusalError: when some step has no solution in the searched support
    """
    S, M = F.source, F.target
    if not isinstance(M, DiagonalBimodule):
        raise RefusalError("lift_map", "the map must land in a shifted diagonal")
    k = M.shift
    Rk = R.shifted(k) if k else R
    Rk.augmentation = R.augmentation
    eps = FreeMap(Rk, M, R.augmentation)
    C = S.category
    field = C.field
    lifted: Dict[Hashable, Element] = {}
    partial = FreeMap(S, Rk, {}, validate=False)
    for key in S.dependency_order():
        G = S.gen[key]
        want_d = partial.apply(S.D_elem(key))
        want_eps = F.images.get(key, {})
        weight = G.weight if any(m.weight for m in C.monomials) else None
        cols = [lbl for lbl in Rk.basis(G.left, G.right, weight, radius) if Rk.degree_of(lbl) == G.degree]
        rows: Dict[Hashable, int] = {}
        entries = {}
        for j, lbl in enumerate(cols):
            one = {lbl: field.one}
            for out, v in Rk.d_elem(one).items():
                entries[(rows.setdefault(('d', out), len(rows)), j)] = v
            for out, v in eps.apply(one).items():
                entries[(rows.setdefault(('e', out), len(rows)), j)] = v
        rhs = {}
        for out, v in want_d.items():
            rhs[rows.setdefault(('d', out), len(rows))] = v
        for out, v in want_eps.items():
            rhs[rows.setdefault(('e', out), len(rows))] = v
        x = solve(SparseMatrix(len(rows), len(cols), entries, field), rhs) if rows else {}
        if x is None:
            raise RefusalError("lift_map", f"no lift for generator {key!r} within the searched support")
        lifted[key] = {cols[j]: v for j, v in x.items()}
        partial.images[key] = lifted[key]
    return FreeMap(S, Rk, lifted)


# ---------------------------------------------------------------------------
# induction along functors

def induce(R: FreeBimodule, F: DgFunctor, name: str = None) -> FreeBimodule:
    """
    F_!R = B ⊗_A R ⊗_A B for free R: same generators at image objects,
    coefficients pushed through F. Carries the augmentation along.
    """
    om = F.object_map
    one = R.field.one
    gens = [Generator(g.key, om[g.left], om[g.right], g.level, g.shift, g.weight) for g in R.generators]
    D = {}
    for key, terms in R.D.items():
        out = []
        for c, a, h, b in terms:
            for a2, va in F.apply({a: one}).items():
                for b2, vb in F.apply({b: one}).items():
                    out.append((c * va * vb, a2, h, b2))
        D[key] = out
    aug = {key: F.apply(img) for key, img in R.augmentation.items()}
    return FreeBimodule(F.target, gens, D, name=name or f"F_!{R.name}", kind=R.kind, augmentation=aug,
                        truncated_below=R.truncated_below, weight_bound=R.weight_bound)


def induce_map(M: FreeMap, F: DgFunctor, source: FreeBimodule, target: FreeBimodule) -> FreeMap:
    """F_!(M) between already induced free bimodules."""
    one = M.source.field.one
    images = {}
    for key, img in M.images.items():
        out: Element = {}
        for (a, h, b), c in img.items():
            for a2, va in F.apply({a: one}).items():
                for b2, vb in F.apply({b: one}).items():
                    _accumulate(out, (a2, h, b2), c * va * vb)
        images[key] = out
    return FreeMap(source, target, images)
