"""Exact linear algebra over the rationals.

Scalars are ``fractions.Fraction`` values, which are always in canonical
form (coprime numerator/denominator, positive denominator).  Matrices are
immutable, dense and row-major.  Rank and determinant use fraction-free
(Bareiss) elimination on denominator-cleared integer rows, so intermediate
values stay integral; kernels and linear solves use plain rational
Gauss-Jordan elimination.  Nothing here is approximate: every returned
value is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

Rational = Fraction
Vector = tuple[Fraction, ...]

#: Dense exact charpoly is quartic in the dimension; refuse silly sizes.
CHARPOLY_SIZE_LIMIT = 32

__all__ = [
    "CHARPOLY_SIZE_LIMIT",
    "DegenerateConstraint",
    "InconsistentSystem",
    "Polynomial",
    "Rational",
    "RationalMatrix",
    "SizeLimitExceeded",
    "Vector",
    "ZeroPolynomial",
    "as_rational",
    "charpoly_exact",
    "det_exact",
    "dot",
    "hurwitz_stable",
    "inverse",
    "nullspace",
    "outer",
    "rank_exact",
    "solve_constrained",
    "vector",
]


class SizeLimitExceeded(ValueError):
    """Input is larger than the guard for dense exact computation."""


class ZeroPolynomial(ValueError):
    """The zero polynomial has no root-location verdict."""


class InconsistentSystem(ValueError):
    """The right-hand side is not in the range of the matrix."""


class DegenerateConstraint(ValueError):
    """The constraint vector annihilates the kernel direction."""


def as_rational(value: int | str | Fraction) -> Fraction:
    """Coerce an int, an exact ``"p"``/``"p/q"`` string, or a Fraction.

    Floats are rejected on purpose: silently rationalizing binary floats
    would defeat the point of an exact pipeline.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, str)):
        return Fraction(value)
    raise TypeError(f"not an exact rational: {value!r}")


def vector(values: Iterable[int | str | Fraction]) -> Vector:
    return tuple(as_rational(v) for v in values)


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    if len(u) != len(v):
        raise ValueError(f"dot of incompatible lengths {len(u)} and {len(v)}")
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


class RationalMatrix:
    """Immutable dense matrix of Fractions.

    Construct from an iterable of rows; entries may be ints, ``"p/q"``
    strings or Fractions.  Treat instances as frozen values.
    """

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows: Iterable[Sequence[int | str | Fraction]]):
        data = tuple(tuple(as_rational(x) for x in row) for row in rows)
        if not data or not data[0]:
            raise ValueError("matrix must have at least one row and column")
        width = len(data[0])
        if any(len(row) != width for row in data):
            raise ValueError("ragged rows")
        self.rows = len(data)
        self.cols = width
        self.data = data

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls(
            tuple(Fraction(1 if i == j else 0) for j in range(n)) for i in range(n)
        )

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RationalMatrix":
        return cls(tuple(Fraction(0) for _ in range(cols)) for _ in range(rows))

    @classmethod
    def diagonal(cls, entries: Sequence[int | str | Fraction]) -> "RationalMatrix":
        d = vector(entries)
        n = len(d)
        return cls(
            tuple(d[i] if i == j else Fraction(0) for j in range(n)) for i in range(n)
        )

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self.data[i][j]

    def row(self, i: int) -> Vector:
        return self.data[i]

    def column(self, j: int) -> Vector:
        return tuple(row[j] for row in self.data)

    def transpose(self) -> "RationalMatrix":
        return RationalMatrix(zip(*self.data))

    def is_square(self) -> bool:
        return self.rows == self.cols

    def __add__(self, other: "RationalMatrix") -> "RationalMatrix":
        self._require_same_shape(other)
        return RationalMatrix(
            tuple(a + b for a, b in zip(ra, rb)) for ra, rb in zip(self.data, other.data)
        )

    def __sub__(self, other: "RationalMatrix") -> "RationalMatrix":
        self._require_same_shape(other)
        return RationalMatrix(
            tuple(a - b for a, b in zip(ra, rb)) for ra, rb in zip(self.data, other.data)
        )

    def __neg__(self) -> "RationalMatrix":
        return RationalMatrix(tuple(-a for a in row) for row in self.data)

    def scale(self, factor: int | str | Fraction) -> "RationalMatrix":
        f = as_rational(factor)
        return RationalMatrix(tuple(f * a for a in row) for row in self.data)

    def __matmul__(self, other):
        if isinstance(other, RationalMatrix):
            if self.cols != other.rows:
                raise ValueError(
                    f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}"
                )
            cols = other.transpose().data
            return RationalMatrix(
                tuple(dot(row, col) for col in cols) for row in self.data
            )
        return self.matvec(other)

    def matvec(self, v: Sequence[Fraction]) -> Vector:
        if len(v) != self.cols:
            raise ValueError(f"vector of length {len(v)} against {self.cols} columns")
        return tuple(dot(row, v) for row in self.data)

    def vecmat(self, v: Sequence[Fraction]) -> Vector:
        """Left product vᵀ·M, returned as a plain vector."""
        if len(v) != self.rows:
            raise ValueError(f"vector of length {len(v)} against {self.rows} rows")
        return tuple(dot(v, self.column(j)) for j in range(self.cols))

    def trace(self) -> Fraction:
        if not self.is_square():
            raise ValueError("trace of a non-square matrix")
        return sum((self.data[i][i] for i in range(self.rows)), Fraction(0))

    def max_abs(self) -> Fraction:
        return max(abs(x) for row in self.data for x in row)

    def to_float(self) -> list[list[float]]:
        return [[float(x) for x in row] for row in self.data]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, RationalMatrix) and self.data == other.data

    def __hash__(self):
        return hash(self.data)

    def __repr__(self) -> str:
        body = "; ".join(" ".join(str(x) for x in row) for row in self.data)
        return f"RationalMatrix[{body}]"

    def _require_same_shape(self, other: "RationalMatrix") -> None:
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch")


def outer(u: Sequence[Fraction], v: Sequence[Fraction]) -> RationalMatrix:
    return RationalMatrix(tuple(a * b for b in v) for a in u)


def _cleared_int_rows(m: RationalMatrix) -> tuple[list[list[int]], list[int]]:
    """Scale each row to integers; returns (rows, per-row multipliers)."""
    rows: list[list[int]] = []
    mults: list[int] = []
    for row in m.data:
        mult = lcm(*(x.denominator for x in row)) if row else 1
        rows.append([int(x * mult) for x in row])
        mults.append(mult)
    return rows, mults


def _exact_div(num: int, den: int) -> int:
    q, r = divmod(num, den)
    if r:
        raise ArithmeticError("fraction-free elimination produced a non-integer")
    return q


def rank_exact(m: RationalMatrix) -> int:
    """Rank over the rationals, by fraction-free Bareiss elimination.

    Row scaling does not change rank, so rows are first cleared to
    integers; pivoting uses exact nonzero tests (first nonzero in the
    current column), and every update divides exactly by the previous
    pivot.
    """
    a, _ = _cleared_int_rows(m)
    n_rows, n_cols = m.rows, m.cols
    pivots = 0
    prev = 1
    for col in range(n_cols):
        if pivots == n_rows:
            break
        pivot_row = next((r for r in range(pivots, n_rows) if a[r][col] != 0), None)
        if pivot_row is None:
            continue
        if pivot_row != pivots:
            a[pivots], a[pivot_row] = a[pivot_row], a[pivots]
        p = a[pivots][col]
        top = a[pivots]
        for r in range(pivots + 1, n_rows):
            cur = a[r]
            factor = cur[col]
            for c in range(col + 1, n_cols):
                cur[c] = _exact_div(p * cur[c] - factor * top[c], prev)
            cur[col] = 0
        prev = p
        pivots += 1
    return pivots


def det_exact(m: RationalMatrix) -> Fraction:
    """Determinant by fraction-free Bareiss elimination."""
    if not m.is_square():
        raise ValueError("determinant of a non-square matrix")
    a, mults = _cleared_int_rows(m)
    n = m.rows
    sign = 1
    prev = 1
    for k in range(n - 1):
        pivot_row = next((r for r in range(k, n) if a[r][k] != 0), None)
        if pivot_row is None:
            return Fraction(0)
        if pivot_row != k:
            a[k], a[pivot_row] = a[pivot_row], a[k]
            sign = -sign
        p = a[k][k]
        top = a[k]
        for r in range(k + 1, n):
            cur = a[r]
            factor = cur[k]
            for c in range(k + 1, n):
                cur[c] = _exact_div(p * cur[c] - factor * top[c], prev)
            cur[k] = 0
        prev = p
    cleared_det = sign * a[n - 1][n - 1]
    scale = 1
    for mult in mults:
        scale *= mult
    return Fraction(cleared_det, scale)


def _rref(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """In-place reduced row echelon form; returns (rows, pivot column list)."""
    n_rows = len(rows)
    n_cols = len(rows[0]) if rows else 0
    pivot_cols: list[int] = []
    r = 0
    for c in range(n_cols):
        if r == n_rows:
            break
        pivot_row = next((i for i in range(r, n_rows) if rows[i][c] != 0), None)
        if pivot_row is None:
            continue
        rows[r], rows[pivot_row] = rows[pivot_row], rows[r]
        inv = Fraction(1) / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(n_rows):
            if i != r and rows[i][c] != 0:
                factor = rows[i][c]
                rows[i] = [x - factor * y for x, y in zip(rows[i], rows[r])]
        pivot_cols.append(c)
        r += 1
    return rows, pivot_cols


def _normalize_first_nonzero(v: Sequence[Fraction]) -> Vector:
    lead = next((x for x in v if x != 0), None)
    if lead is None:
        return tuple(v)
    inv = Fraction(1) / lead
    return tuple(x * inv for x in v)


def nullspace(m: RationalMatrix, side: str = "right") -> list[Vector]:
    """Exact kernel basis, each vector scaled so its first nonzero entry is 1.

    ``side="right"`` solves m·v = 0, ``side="left"`` solves vᵀ·m = 0.
    Basis vectors are ordered by their free column, ascending, which makes
    the output deterministic.
    """
    if side == "left":
        work = m.transpose()
    elif side == "right":
        work = m
    else:
        raise ValueError(f"side must be 'right' or 'left', not {side!r}")
    rows = [list(row) for row in work.data]
    rref_rows, pivot_cols = _rref(rows)
    pivot_set = set(pivot_cols)
    basis: list[Vector] = []
    for free in range(work.cols):
        if free in pivot_set:
            continue
        v = [Fraction(0)] * work.cols
        v[free] = Fraction(1)
        for row_idx, pc in enumerate(pivot_cols):
            v[pc] = -rref_rows[row_idx][free]
        basis.append(_normalize_first_nonzero(v))
    return basis


def _solve_particular(m: RationalMatrix, y: Sequence[Fraction]) -> Vector:
    """One exact solution of m·x = y with free variables set to zero."""
    aug = [list(row) + [yy] for row, yy in zip(m.data, y)]
    rref_rows, pivot_cols = _rref(aug)
    if m.cols in pivot_cols:
        raise InconsistentSystem("right-hand side is not in the range")
    x = [Fraction(0)] * m.cols
    for row_idx, pc in enumerate(pivot_cols):
        x[pc] = rref_rows[row_idx][m.cols]
    return tuple(x)


def solve_constrained(
    m: RationalMatrix,
    y: Sequence[int | str | Fraction],
    c: Sequence[int | str | Fraction],
) -> Vector:
    """Solve m·x = y subject to (x, c) = 0, for m with a one-dimensional kernel.

    The kernel direction h makes the unconstrained solution unique only up
    to multiples of h; the constraint picks the representative with
    (x, c) = 0, which exists and is unique iff (c, h) != 0.
    """
    if not m.is_square():
        raise ValueError("constrained solve expects a square matrix")
    y = vector(y)
    c = vector(c)
    if len(y) != m.rows or len(c) != m.cols:
        raise ValueError("right-hand side or constraint has the wrong length")
    kernel = nullspace(m, side="right")
    if len(kernel) != 1:
        raise ValueError(f"kernel dimension is {len(kernel)}, need exactly 1")
    h = kernel[0]
    ch = dot(c, h)
    if ch == 0:
        raise DegenerateConstraint("constraint vector is orthogonal to the kernel")
    x0 = _solve_particular(m, y)
    shift = dot(x0, c) / ch
    return tuple(a - shift * b for a, b in zip(x0, h))


def inverse(m: RationalMatrix) -> RationalMatrix:
    """Exact inverse by Gauss-Jordan; raises ValueError when singular."""
    if not m.is_square():
        raise ValueError("inverse of a non-square matrix")
    n = m.rows
    aug = [
        list(row) + [Fraction(1 if i == j else 0) for j in range(n)]
        for i, row in enumerate(m.data)
    ]
    rref_rows, pivot_cols = _rref(aug)
    if pivot_cols != list(range(n)):
        raise ValueError("matrix is singular")
    return RationalMatrix(tuple(row[n:]) for row in rref_rows)


@dataclass(frozen=True)
class Polynomial:
    """Univariate polynomial, coefficients ascending, trailing zeros trimmed."""

    coefficients: tuple[Fraction, ...]

    def __post_init__(self):
        coeffs = tuple(as_rational(c) for c in self.coefficients)
        while coeffs and coeffs[-1] == 0:
            coeffs = coeffs[:-1]
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def degree(self) -> int:
        """Degree, with the zero polynomial at -1."""
        return len(self.coefficients) - 1

    def is_zero(self) -> bool:
        return not self.coefficients

    def __call__(self, x: int | str | Fraction) -> Fraction:
        x = as_rational(x)
        acc = Fraction(0)
        for c in reversed(self.coefficients):
            acc = acc * x + c
        return acc

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        parts = []
        for power in range(self.degree, -1, -1):
            c = self.coefficients[power]
            if c == 0:
                continue
            mono = "1" if power == 0 else ("x" if power == 1 else f"x^{power}")
            parts.append(f"{c}*{mono}" if power else f"{c}")
        return " + ".join(parts)


def charpoly_exact(m: RationalMatrix) -> Polynomial:
    """Characteristic polynomial det(λI - m) by the Faddeev-LeVerrier recurrence.

    Exact over the rationals; the constant coefficient equals
    (-1)^n · det(m), which is asserted against the independent Bareiss
    determinant elsewhere in the test suite.
    """
    if not m.is_square():
        raise ValueError("characteristic polynomial of a non-square matrix")
    n = m.rows
    if n > CHARPOLY_SIZE_LIMIT:
        raise SizeLimitExceeded(f"matrix size {n} exceeds limit {CHARPOLY_SIZE_LIMIT}")
    ident = RationalMatrix.identity(n)
    descending = [Fraction(1)]  # coefficient of λ^n
    bk = m
    for k in range(1, n + 1):
        ck = -bk.trace() / k
        descending.append(ck)
        if k < n:
            bk = m @ (bk + ident.scale(ck))
    return Polynomial(tuple(reversed(descending)))


def hurwitz_stable(p: Polynomial) -> bool:
    """True iff every root of p has strictly negative real part.

    Classical Hurwitz-determinant criterion, evaluated exactly: after
    normalizing the leading coefficient positive, all leading principal
    minors of the Hurwitz matrix must be strictly positive.  A nonzero
    constant has no roots and counts as stable.
    """
    if p.is_zero():
        raise ZeroPolynomial("the zero polynomial has no stability verdict")
    coeffs = p.coefficients
    if coeffs[-1] < 0:
        coeffs = tuple(-c for c in coeffs)
    n = len(coeffs) - 1
    if n == 0:
        return True
    desc = tuple(reversed(coeffs))  # desc[0] is the (positive) leading coefficient
    # Positive coefficients are necessary; bail out early when violated.
    if any(c <= 0 for c in desc[1:]):
        return False

    def entry(i: int, j: int) -> Fraction:
        idx = 2 * j - i + 1
        return desc[idx] if 0 <= idx <= n else Fraction(0)

    for k in range(1, n + 1):
        minor = RationalMatrix(
            tuple(entry(i, j) for j in range(k)) for i in range(k)
        )
        if det_exact(minor) <= 0:
            return False
    return True
