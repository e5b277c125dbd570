"""
Exact sparse linear algebra over the rationals and prime fields.

Matrices are immutable row-sparse maps. Elimination over ℚ is fraction-free
(integer rows with content normalisation, Markowitz pivot choice); over 𝔽_p it
runs on residues directly. Pivoting is deterministic: minimal Markowitz cost,
then lowest row, then lowest column.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from sympy import isprime

from cykit_config import get_settings
from errors import IntegrityError
from monitoring import logger, track_performance

Vector = Dict[int, object]


class Residue:
    """An element of 𝔽_p."""

    __slots__ = ('value', 'modulus')

    def __init__(self, value: int, modulus: int):
        self.value = value % modulus
        self.modulus = modulus

    def _other(self, other):
        if isinstance(other, Residue):
            if other.modulus != self.modulus:
                raise TypeError(f"Cannot combine residues mod {self.modulus} and mod {other.modulus}")
            return other.value
        if isinstance(other, int) and not isinstance(other, bool):
            return other
        return None

    def __add__(self, other):
        v = self._other(other)
        if v is None:
            return NotImplemented
        return Residue(self.value + v, self.modulus)

    __radd__ = __add__

    def __sub__(self, other):
        v = self._other(other)
        if v is None:
            return NotImplemented
        return Residue(self.value - v, self.modulus)

    def __rsub__(self, other):
        v = self._other(other)
        if v is None:
            return NotImplemented
        return Residue(v - self.value, self.modulus)

    def __mul__(self, other):
        v = self._other(other)
        if v is None:
            return NotImplemented
        return Residue(self.value * v, self.modulus)

    __rmul__ = __mul__

    def __truediv__(self, other):
        v = self._other(other)
        if v is None:
            return NotImplemented
        return self * Residue(v, self.modulus).inverse()

    def __rtruediv__(self, other):
        v = self._other(other)
        if v is None:
            return NotImplemented
        return Residue(v, self.modulus) * self.inverse()

    def __neg__(self):
        return Residue(-self.value, self.modulus)

    def inverse(self) -> 'Residue':
        if self.value == 0:
            raise ZeroDivisionError(f"0 has no inverse mod {self.modulus}")
        return Residue(pow(self.value, -1, self.modulus), self.modulus)

    def __eq__(self, other):
        if isinstance(other, Residue):
            return self.modulus == other.modulus and self.value == other.value
        if isinstance(other, int) and not isinstance(other, bool):
            return self.value == other % self.modulus
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.modulus))

    def __bool__(self):
        return self.value != 0

    def __repr__(self):
        return f"Residue({self.value}, {self.modulus})"


class Field:
    """Scalar field descriptor shared by matrices and complexes."""

    name = 'field'
    characteristic = 0

    def coerce(self, x):
        raise NotImplementedError

    @property
    def zero(self):
        return self.coerce(0)

    @property
    def one(self):
        return self.coerce(1)

    def from_pair(self, num: int, den: int):
        raise NotImplementedError

    def to_pair(self, x) -> List[int]:
        raise NotImplementedError

    def __eq__(self, other):
        return isinstance(other, Field) and self.name == other.name

    def __hash__(self):
        return hash(self.name)

    def __repr__(self):
        return self.name


class RationalField(Field):
    """The field ℚ with Fraction elements."""

    name = 'QQ'

    def coerce(self, x):
        if isinstance(x, Fraction):
            return x
        if isinstance(x, int) and not isinstance(x, bool):
            return Fraction(x)
        raise TypeError(f"{x!r} is not a rational scalar")

    def from_pair(self, num: int, den: int):
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        return Fraction(num, den)

    def to_pair(self, x) -> List[int]:
        x = self.coerce(x)
        return [x.numerator, x.denominator]


class PrimeField(Field):
    """The field 𝔽_p with Residue elements."""

    def __init__(self, p: int):
        if not isprime(p):
            raise ValueError(f"{p} is not prime")
        self.p = p
        self.name = f"GF({p})"
        self.characteristic = p

    def coerce(self, x):
        if isinstance(x, Residue):
            if x.modulus != self.p:
                raise TypeError(f"Residue mod {x.modulus} used in {self.name}")
            return x
        if isinstance(x, int) and not isinstance(x, bool):
            return Residue(x, self.p)
        raise TypeError(f"{x!r} is not a scalar of {self.name}")

    def from_pair(self, num: int, den: int):
        if den % self.p == 0:
            raise ZeroDivisionError(f"denominator {den} vanishes in {self.name}")
        return Residue(num, self.p) * Residue(den, self.p).inverse()

    def to_pair(self, x) -> List[int]:
        return [self.coerce(x).value, 1]


QQ = RationalField()


@lru_cache(maxsize=None)
def GF(p: int) -> PrimeField:
    """Return the (shared) prime field of order p."""
    return PrimeField(p)


def field_from_settings() -> Field:
    """The field selected by CYKIT_PRIME, rationals when unset."""
    prime = get_settings().prime
    return GF(prime) if prime else QQ


class SparseMatrix:
    """
    Immutable sparse matrix over a Field.

    Rows are stored as dicts column -> nonzero scalar.
    """

    __slots__ = ('rows', 'cols', 'field', '_rows')

    def __init__(self, rows: int, cols: int, entries: Mapping[Tuple[int, int], object] = None,
                 field: Field = QQ):
        self.rows = rows
        self.cols = cols
        self.field = field
        table: Dict[int, Dict[int, object]] = {}
        for (r, c), value in (entries or {}).items():
            if not (0 <= r < rows and 0 <= c < cols):
                raise IndexError(f"entry ({r},{c}) outside {rows}x{cols}")
            value = field.coerce(value)
            if value:
                table.setdefault(r, {})[c] = value
        self._rows = table

    @classmethod
    def _from_row_dicts(cls, rows: int, cols: int, table: Dict[int, Dict[int, object]], field: Field):
        m = cls.__new__(cls)
        m.rows, m.cols, m.field = rows, cols, field
        m._rows = {r: row for r, row in table.items() if row}
        return m

    @classmethod
    def from_dense(cls, data: Sequence[Sequence[object]], field: Field = QQ, cols: int = None):
        ncols = len(data[0]) if data else (cols or 0)
        entries = {(r, c): v for r, row in enumerate(data) for c, v in enumerate(row) if v}
        return cls(len(data), ncols, entries, field)

    @classmethod
    def from_columns(cls, rows: int, columns: Sequence[Mapping[int, object]], field: Field = QQ):
        entries = {}
        for c, vec in enumerate(columns):
            for r, v in vec.items():
                entries[(r, c)] = v
        return cls(rows, len(columns), entries, field)

    @classmethod
    def zero(cls, rows: int, cols: int, field: Field = QQ):
        return cls(rows, cols, {}, field)

    @classmethod
    def identity(cls, n: int, field: Field = QQ):
        return cls(n, n, {(i, i): 1 for i in range(n)}, field)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.rows, self.cols

    @property
    def entries(self) -> Dict[Tuple[int, int], object]:
        return {(r, c): v for r, row in self._rows.items() for c, v in row.items()}

    def row(self, r: int) -> Dict[int, object]:
        return dict(self._rows.get(r, {}))

    def nnz(self) -> int:
        return sum(len(row) for row in self._rows.values())

    def is_zero(self) -> bool:
        return not self._rows

    def get(self, r: int, c: int):
        return self._rows.get(r, {}).get(c, self.field.zero)

    def to_dense(self) -> List[List[object]]:
        zero = self.field.zero
        return [[self._rows.get(r, {}).get(c, zero) for c in range(self.cols)] for r in range(self.rows)]

    def _check_field(self, other: 'SparseMatrix'):
        if other.field != self.field:
            raise TypeError(f"Cannot combine matrices over {self.field} and {other.field}")

    def __matmul__(self, other: 'SparseMatrix') -> 'SparseMatrix':
        self._check_field(other)
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        out: Dict[int, Dict[int, object]] = {}
        for r, row in self._rows.items():
            acc: Dict[int, object] = {}
            for k, a in row.items():
                orow = other._rows.get(k)
                if not orow:
                    continue
                for c, b in orow.items():
                    acc[c] = acc.get(c, 0) + a * b
            acc = {c: v for c, v in acc.items() if v}
            if acc:
                out[r] = acc
        return SparseMatrix._from_row_dicts(self.rows, other.cols, out, self.field)

    def __add__(self, other: 'SparseMatrix') -> 'SparseMatrix':
        self._check_field(other)
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} + {other.shape}")
        out = {r: dict(row) for r, row in self._rows.items()}
        for r, row in other._rows.items():
            target = out.setdefault(r, {})
            for c, v in row.items():
                s = target.get(c, 0) + v
                if s:
                    target[c] = s
                else:
                    target.pop(c, None)
        return SparseMatrix._from_row_dicts(self.rows, self.cols, out, self.field)

    def __neg__(self) -> 'SparseMatrix':
        return self.scale(-1)

    def __sub__(self, other: 'SparseMatrix') -> 'SparseMatrix':
        return self + (-other)

    def __eq__(self, other):
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return self.shape == other.shape and self.field == other.field and self._rows == other._rows

    def __hash__(self):
        return hash((self.rows, self.cols, self.field, tuple(sorted(self.entries.items(), key=lambda kv: kv[0]))))

    def scale(self, s) -> 'SparseMatrix':
        s = self.field.coerce(s)
        if not s:
            return SparseMatrix.zero(self.rows, self.cols, self.field)
        out = {r: {c: v * s for c, v in row.items()} for r, row in self._rows.items()}
        return SparseMatrix._from_row_dicts(self.rows, self.cols, out, self.field)

    def transpose(self) -> 'SparseMatrix':
        out: Dict[int, Dict[int, object]] = {}
        for r, row in self._rows.items():
            for c, v in row.items():
                out.setdefault(c, {})[r] = v
        return SparseMatrix._from_row_dicts(self.cols, self.rows, out, self.field)

    def apply(self, vec: Mapping[int, object]) -> Vector:
        """Return self · vec for a sparse column vector."""
        out: Vector = {}
        for r, row in self._rows.items():
            acc = 0
            for c, a in row.items():
                v = vec.get(c)
                if v:
                    acc = acc + a * v
            if acc:
                out[r] = acc
        return out

    def column(self, c: int) -> Vector:
        return {r: row[c] for r, row in self._rows.items() if c in row}

    def __repr__(self):
        return f"SparseMatrix({self.rows}x{self.cols}, nnz={self.nnz()}, {self.field})"


def block(blocks: Sequence[Sequence[Optional[SparseMatrix]]], row_sizes: Sequence[int],
          col_sizes: Sequence[int], field: Field = QQ) -> SparseMatrix:
    """Assemble a block matrix; None blocks are zero."""
    row_off = [0]
    for s in row_sizes:
        row_off.append(row_off[-1] + s)
    col_off = [0]
    for s in col_sizes:
        col_off.append(col_off[-1] + s)
    out: Dict[int, Dict[int, object]] = {}
    for i, brow in enumerate(blocks):
        for j, m in enumerate(brow):
            if m is None or m.is_zero():
                continue
            if m.shape != (row_sizes[i], col_sizes[j]):
                raise ValueError(f"block ({i},{j}) has shape {m.shape}, expected {(row_sizes[i], col_sizes[j])}")
            if m.field != field:
                raise TypeError(f"block ({i},{j}) is over {m.field}, expected {field}")
            for r, row in m._rows.items():
                target = out.setdefault(row_off[i] + r, {})
                for c, v in row.items():
                    target[col_off[j] + c] = v
    return SparseMatrix._from_row_dicts(row_off[-1], col_off[-1], out, field)


def direct_sum(mats: Sequence[SparseMatrix], field: Field = QQ) -> SparseMatrix:
    n = len(mats)
    grid = [[mats[i] if i == j else None for j in range(n)] for i in range(n)]
    return block(grid, [m.rows for m in mats], [m.cols for m in mats], field)


# ---------------------------------------------------------------------------
# elimination


class _RationalRows:
    """Fraction-free row operations on integer rows."""

    def __init__(self, field: Field):
        self.field = field

    def prepare(self, row: Mapping[int, object]) -> Dict[int, int]:
        den = 1
        for v in row.values():
            den = den * v.denominator // math.gcd(den, v.denominator)
        ints = {c: int(v * den) for c, v in row.items() if v}
        return self._content(ints)

    @staticmethod
    def _content(row: Dict[int, int]) -> Dict[int, int]:
        g = 0
        for v in row.values():
            g = math.gcd(g, v)
        if g > 1:
            row = {c: v // g for c, v in row.items()}
        return row

    def eliminate(self, target: Dict[int, int], pivot: Dict[int, int], col: int) -> Dict[int, int]:
        a = target[col]
        p = pivot[col]
        g = math.gcd(a, p)
        fa, fp = p // g, a // g
        out = {c: v * fa for c, v in target.items()}
        for c, v in pivot.items():
            s = out.get(c, 0) - fp * v
            if s:
                out[c] = s
            else:
                out.pop(c, None)
        return self._content(out)

    def normalize(self, row: Dict[int, int], col: int) -> Dict[int, object]:
        p = row[col]
        return {c: Fraction(v, p) for c, v in row.items()}


class _ModularRows:
    """Row operations over 𝔽_p on raw residues."""

    def __init__(self, field: PrimeField):
        self.field = field
        self.p = field.p

    def prepare(self, row: Mapping[int, object]) -> Dict[int, int]:
        out = {c: self.field.coerce(v).value for c, v in row.items()}
        return {c: v for c, v in out.items() if v}

    def eliminate(self, target: Dict[int, int], pivot: Dict[int, int], col: int) -> Dict[int, int]:
        p = self.p
        a = target[col] * pow(pivot[col], -1, p) % p
        out = dict(target)
        for c, v in pivot.items():
            s = (out.get(c, 0) - a * v) % p
            if s:
                out[c] = s
            else:
                out.pop(c, None)
        return out

    def normalize(self, row: Dict[int, int], col: int) -> Dict[int, object]:
        p = self.p
        inv = pow(row[col], -1, p)
        return {c: Residue(v * inv, p) for c, v in row.items()}


def _row_ops(field: Field):
    if isinstance(field, PrimeField):
        return _ModularRows(field)
    return _RationalRows(field)


@dataclass
class Echelon:
    """Reduced row echelon form: pivot column -> normalized row (pivot entry 1)."""
    cols: int
    field: Field
    pivots: Dict[int, Dict[int, object]] = dc_field(default_factory=dict)

    @property
    def rank(self) -> int:
        return len(self.pivots)


def _choose_pivot(active: Dict[int, Dict[int, int]]) -> Tuple[int, int]:
    col_count: Dict[int, int] = {}
    for row in active.values():
        for c in row:
            col_count[c] = col_count.get(c, 0) + 1
    best = None
    for r in sorted(active):
        row = active[r]
        rc = len(row) - 1
        for c in sorted(row):
            key = (rc * (col_count[c] - 1), r, c)
            if best is None or key < best:
                best = key
    return best[1], best[2]


def _leading_pivot(active: Dict[int, Dict[int, int]]) -> Tuple[int, int]:
    col = max(max(row) for row in active.values())
    r = min(r for r, row in active.items() if col in row)
    return r, col


def row_reduce(rows: Iterable[Mapping[int, object]], cols: int, field: Field,
               leading: bool = False) -> Echelon:
    """
    Gauss-Jordan elimination with deterministic pivoting.

    Args:
        rows: Sparse rows (column -> scalar)
        cols: Number of columns
        field: Scalar field
        leading: Pivot on the largest column first, so the pivot set is the
            set of leading terms of the row span (normal forms need this);
            otherwise Markowitz pivoting

    Returns:
        Echelon: the reduced row echelon form
    """
    ops = _row_ops(field)
    choose = _leading_pivot if leading else _choose_pivot
    active = {}
    for i, row in enumerate(rows):
        prepared = ops.prepare(row)
        if prepared:
            active[i] = prepared
    done: Dict[int, Dict[int, int]] = {}
    while active:
        r, c = choose(active)
        pivot = active.pop(r)
        for other in list(active):
            if c in active[other]:
                reduced = ops.eliminate(active[other], pivot, c)
                if reduced:
                    active[other] = reduced
                else:
                    del active[other]
        for pc in list(done):
            if c in done[pc]:
                done[pc] = ops.eliminate(done[pc], pivot, c)
        done[c] = pivot
    ech = Echelon(cols=cols, field=field)
    for c in sorted(done):
        ech.pivots[c] = ops.normalize(done[c], c)
    return ech


def _matrix_rows(m: SparseMatrix) -> List[Dict[int, object]]:
    return [m._rows.get(r, {}) for r in range(m.rows)]


def rank(m: SparseMatrix) -> int:
    """Exact rank of m over its field."""
    if m.is_zero():
        return 0
    return row_reduce(_matrix_rows(m), m.cols, m.field).rank


def kernel_basis(m: SparseMatrix) -> List[Vector]:
    """
    Exact basis of the null space of m, one vector per free column.

    Returns:
        list: sparse vectors (column index -> scalar)
    """
    ech = row_reduce(_matrix_rows(m), m.cols, m.field)
    one = m.field.one
    basis = []
    for f in range(m.cols):
        if f in ech.pivots:
            continue
        vec: Vector = {f: one}
        for pc, row in ech.pivots.items():
            v = row.get(f)
            if v:
                vec[pc] = -v
        basis.append(vec)
    return basis


def image_basis(m: SparseMatrix) -> List[Vector]:
    """Basis of the column space of m (pivot-canonical)."""
    ech = row_reduce(_matrix_rows(m.transpose()), m.rows, m.field)
    return [dict(row) for _, row in sorted(ech.pivots.items())]


def solve(m: SparseMatrix, b) -> Optional[Vector]:
    """
    Find x with m·x = b.

    Args:
        m: Coefficient matrix
        b: Right-hand side, a sparse dict or a dense sequence of length m.rows

    Returns:
        A sparse particular solution, or None when inconsistent
    """
    if not isinstance(b, Mapping):
        if len(b) != m.rows:
            raise ValueError(f"right-hand side has length {len(b)}, expected {m.rows}")
        b = {i: v for i, v in enumerate(b) if v}
    elif any(not (0 <= k < m.rows) for k in b):
        raise ValueError("right-hand side index out of range")
    aug = m.cols
    rows = []
    for r in range(m.rows):
        row = dict(m._rows.get(r, {}))
        if b.get(r):
            row[aug] = m.field.coerce(b[r])
        rows.append(row)
    ech = row_reduce(rows, m.cols + 1, m.field)
    if aug in ech.pivots:
        return None
    x: Vector = {}
    for pc, row in ech.pivots.items():
        v = row.get(aug)
        if v:
            x[pc] = v
    return x


class IncrementalBasis:
    """
    Growing span used to pick representatives modulo a subspace.

    ``add`` returns True when the vector was independent of the span so far.
    """

    def __init__(self, field: Field):
        self.field = field
        self._pivots: Dict[int, Dict[int, object]] = {}

    def reduce(self, vec: Mapping[int, object]) -> Vector:
        out = {c: self.field.coerce(v) for c, v in vec.items() if v}
        for pc in sorted(self._pivots):
            a = out.get(pc)
            if a:
                for c, v in self._pivots[pc].items():
                    s = out.get(c, 0) - a * v
                    if s:
                        out[c] = s
                    else:
                        out.pop(c, None)
        return out

    def add(self, vec: Mapping[int, object]) -> bool:
        red = self.reduce(vec)
        if not red:
            return False
        pc = min(red)
        inv = 1 / red[pc] if not isinstance(red[pc], Residue) else red[pc].inverse()
        row = {c: v * inv for c, v in red.items()}
        for other in self._pivots.values():
            a = other.get(pc)
            if a:
                for c, v in row.items():
                    s = other.get(c, 0) - a * v
                    if s:
                        other[c] = s
                    else:
                        other.pop(c, None)
        self._pivots[pc] = row
        return True

    def contains(self, vec: Mapping[int, object]) -> bool:
        return not self.reduce(vec)

    @property
    def dimension(self) -> int:
        return len(self._pivots)


# ---------------------------------------------------------------------------
# complexes


class HomologyDims(dict):
    """degree -> dimension, with the set of degrees whose value is unreliable."""

    def __init__(self, data=(), unreliable=frozenset()):
        super().__init__(data)
        self.unreliable = frozenset(unreliable)

    def reliable(self) -> Dict[int, int]:
        return {k: v for k, v in self.items() if k not in self.unreliable}


class GradedComplex:
    """
    Bounded cochain complex of finite-dimensional spaces on a window [lo, hi].

    ``d[k]`` maps degree k to degree k+1. ``truncated_below`` / ``truncated_above``
    record that the ambient complex continues past the window edge.
    """

    def __init__(self, lo: int, hi: int, dims: Mapping[int, int], d: Mapping[int, SparseMatrix] = None,
                 field: Field = QQ, truncated_below: bool = False, truncated_above: bool = False,
                 labels: Mapping[int, Sequence[object]] = None, validate: bool = True):
        if lo > hi:
            raise ValueError(f"empty window [{lo},{hi}]")
        self.lo, self.hi, self.field = lo, hi, field
        self.dims = {k: int(dims.get(k, 0)) for k in range(lo, hi + 1)}
        self.d: Dict[int, SparseMatrix] = {}
        for k in range(lo, hi):
            m = (d or {}).get(k)
            if m is None:
                m = SparseMatrix.zero(self.dims[k + 1], self.dims[k], field)
            if m.shape != (self.dims[k + 1], self.dims[k]):
                raise IntegrityError(f"differential has shape {m.shape}, expected {(self.dims[k + 1], self.dims[k])}", k)
            if m.field != field:
                raise TypeError(f"differential in degree {k} is over {m.field}, expected {field}")
            self.d[k] = m
        self.truncated_below = truncated_below
        self.truncated_above = truncated_above
        self.labels = {k: list(v) for k, v in (labels or {}).items()}
        if validate:
            self.check()

    @property
    def window(self) -> Tuple[int, int]:
        return self.lo, self.hi

    def dim(self, k: int) -> int:
        return self.dims.get(k, 0)

    def differential(self, k: int) -> SparseMatrix:
        if k in self.d:
            return self.d[k]
        return SparseMatrix.zero(self.dim(k + 1), self.dim(k), self.field)

    def check(self) -> None:
        """Verify d∘d = 0 exactly."""
        for k in range(self.lo, self.hi - 1):
            if not (self.d[k + 1] @ self.d[k]).is_zero():
                raise IntegrityError("d∘d ≠ 0", k)

    def euler_characteristic(self) -> int:
        return sum((-1) ** (k % 2) * n for k, n in self.dims.items())

    def unreliable_degrees(self) -> frozenset:
        flagged = set()
        if self.truncated_below:
            flagged.add(self.lo)
        if self.truncated_above:
            flagged.add(self.hi)
        return frozenset(flagged)

    def __repr__(self):
        return f"GradedComplex([{self.lo},{self.hi}], dims={self.dims})"


@track_performance
def homology_dims(c: GradedComplex, threads: int = None) -> HomologyDims:
    """
    dim H^k = dims(k) − rank d_k − rank d_{k−1} for every k in the window.

    Ranks of the individual differentials are computed in parallel when
    CYKIT_THREADS > 1.
    """
    c.check()
    threads = threads or get_settings().threads
    degrees = list(range(c.lo, c.hi))
    if threads > 1 and len(degrees) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            ranks = dict(zip(degrees, pool.map(lambda k: rank(c.d[k]), degrees)))
    else:
        ranks = {k: rank(c.d[k]) for k in degrees}
    out = {}
    for k in range(c.lo, c.hi + 1):
        out[k] = c.dim(k) - ranks.get(k, 0) - ranks.get(k - 1, 0)
    result = HomologyDims(out, c.unreliable_degrees())
    logger.debug("homology computed", window=[c.lo, c.hi], dims=dict(result))
    return result


def homology_basis(c: GradedComplex, k: int) -> List[Vector]:
    """Pivot-canonical representative cycles of a basis of H^k."""
    cycles = kernel_basis(c.differential(k)) if k < c.hi else [
        {i: c.field.one} for i in range(c.dim(k))]
    span = IncrementalBasis(c.field)
    if k > c.lo:
        for v in image_basis(c.d[k - 1]):
            span.add(v)
    reps = []
    for z in cycles:
        if span.add(z):
            reps.append(z)
    return reps


def is_boundary(c: GradedComplex, k: int, vec: Mapping[int, object]) -> bool:
    """Whether vec lies in the image of d_{k−1}."""
    if not any(vec.values()):
        return True
    if k <= c.lo:
        return False
    return solve(c.d[k - 1], vec) is not None


class ChainMap:
    """Degree-0 map between GradedComplexes with matching windows."""

    def __init__(self, source: GradedComplex, target: GradedComplex, components: Mapping[int, SparseMatrix]):
        self.source, self.target = source, target
        self.field = source.field
        lo = min(source.lo, target.lo)
        hi = max(source.hi, target.hi)
        self.components = {}
        for k in range(lo, hi + 1):
            m = components.get(k)
            if m is None:
                m = SparseMatrix.zero(target.dim(k), source.dim(k), self.field)
            if m.shape != (target.dim(k), source.dim(k)):
                raise IntegrityError(f"component has shape {m.shape}", k)
            self.components[k] = m

    def component(self, k: int) -> SparseMatrix:
        return self.components.get(k, SparseMatrix.zero(self.target.dim(k), self.source.dim(k), self.field))

    def check(self) -> None:
        lo = min(self.source.lo, self.target.lo)
        hi = max(self.source.hi, self.target.hi)
        for k in range(lo, hi):
            left = self.target.differential(k) @ self.component(k)
            right = self.component(k + 1) @ self.source.differential(k)
            if left != right:
                raise IntegrityError("chain-map identity fails", k)


def cone(f: ChainMap) -> GradedComplex:
    """
    Mapping cone: cone^k = A^{k+1} ⊕ B^k, d(a, b) = (−d_A a, f(a) + d_B b).
    """
    f.check()
    a, b = f.source, f.target
    lo = min(a.lo - 1, b.lo)
    hi = max(a.hi - 1, b.hi)
    dims = {k: a.dim(k + 1) + b.dim(k) for k in range(lo, hi + 1)}
    d = {}
    for k in range(lo, hi):
        d[k] = block(
            [[-a.differential(k + 1), None],
             [f.component(k + 1), b.differential(k)]],
            [a.dim(k + 2), b.dim(k + 1)], [a.dim(k + 1), b.dim(k)], f.field)
    return GradedComplex(lo, hi, dims, d, f.field,
                         truncated_below=a.truncated_below or b.truncated_below,
                         truncated_above=a.truncated_above or b.truncated_above)
