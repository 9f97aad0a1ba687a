"""Exact rational matrices and the small amount of linear algebra built on them.

Scalars are :class:`fractions.Fraction`; nothing in this module ever rounds.
"""
from __future__ import annotations

import json
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, Sequence

Rational = Fraction


def as_rational(x) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction.

    Floats are rejected: they would smuggle rounding into exact code.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a rational")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


def format_rational(q: Fraction) -> str:
    return str(q)


@total_ordering
class RationalMatrix:
    """Immutable m x n matrix of exact rationals, stored row-major."""

    __slots__ = ("rows", "cols", "entries", "_hash")

    def __init__(self, rows: int, cols: int, entries: Iterable):
        entries = tuple(as_rational(e) for e in entries)
        if rows < 1 or cols < 1:
            raise ValueError("matrix dimensions must be positive")
        if len(entries) != rows * cols:
            raise ValueError(f"expected {rows * cols} entries, got {len(entries)}")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "_hash", hash((rows, cols, entries)))

    def __setattr__(self, name, value):
        raise AttributeError("RationalMatrix is immutable")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], scale=1) -> "RationalMatrix":
        scale = as_rational(scale)
        m = len(rows)
        n = len(rows[0]) if m else 0
        if any(len(r) != n for r in rows):
            raise ValueError("ragged rows")
        return cls(m, n, [as_rational(x) * scale for r in rows for x in r])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RationalMatrix":
        return cls(rows, cols, [0] * (rows * cols))

    @classmethod
    def unit(cls, rows: int, cols: int, i: int, j: int, value=1) -> "RationalMatrix":
        e = [Fraction(0)] * (rows * cols)
        e[i * cols + j] = as_rational(value)
        return cls(rows, cols, e)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def tolist(self) -> list[list[Fraction]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def transpose(self) -> "RationalMatrix":
        m, n = self.rows, self.cols
        return RationalMatrix(n, m, [self.entries[i * n + j] for j in range(n) for i in range(m)])

    T = property(transpose)

    def __neg__(self) -> "RationalMatrix":
        return RationalMatrix(self.rows, self.cols, [-e for e in self.entries])

    def __add__(self, other: "RationalMatrix") -> "RationalMatrix":
        _check_same_shape(self, other)
        return RationalMatrix(self.rows, self.cols, [a + b for a, b in zip(self.entries, other.entries)])

    def __sub__(self, other: "RationalMatrix") -> "RationalMatrix":
        _check_same_shape(self, other)
        return RationalMatrix(self.rows, self.cols, [a - b for a, b in zip(self.entries, other.entries)])

    def scale(self, c) -> "RationalMatrix":
        c = as_rational(c)
        return RationalMatrix(self.rows, self.cols, [c * e for e in self.entries])

    def __mul__(self, c) -> "RationalMatrix":
        return self.scale(c)

    __rmul__ = __mul__

    def dot(self, other: "RationalMatrix") -> Fraction:
        """Hilbert-Schmidt pairing sum_ij a_ij b_ij."""
        _check_same_shape(self, other)
        return sum((a * b for a, b in zip(self.entries, other.entries)), Fraction(0))

    def is_zero(self) -> bool:
        return not any(self.entries)

    def common_denominator(self) -> int:
        from math import lcm
        return lcm(*(e.denominator for e in self.entries))

    def integer_entries(self) -> tuple[int, list[int]]:
        """Return ``(q, ints)`` with ``self == ints / q`` and q > 0 minimal."""
        q = self.common_denominator()
        return q, [int(e * q) for e in self.entries]

    def to_float(self):
        import numpy as np
        return np.array([float(e) for e in self.entries]).reshape(self.rows, self.cols)

    def __eq__(self, other):
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        return self.shape == other.shape and self.entries == other.entries

    def __lt__(self, other: "RationalMatrix") -> bool:
        return lex_compare(self, other) < 0

    def __hash__(self):
        return self._hash

    def __repr__(self):
        body = "; ".join(" ".join(str(x) for x in self.row(i)) for i in range(self.rows))
        return f"RationalMatrix([{body}])"

    def to_json(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "entries": [[format_rational(x) for x in self.row(i)] for i in range(self.rows)],
        }

    @classmethod
    def from_json(cls, obj) -> "RationalMatrix":
        if isinstance(obj, str):
            obj = json.loads(obj)
        rows = obj["entries"]
        mat = cls.from_rows(rows)
        if (mat.rows, mat.cols) != (obj.get("rows", mat.rows), obj.get("cols", mat.cols)):
            raise ValueError("declared shape does not match entries")
        return mat


def _check_same_shape(a: RationalMatrix, b: RationalMatrix) -> None:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")


def lex_compare(a: RationalMatrix, b: RationalMatrix) -> int:
    """Row-major lexicographic comparison; returns -1, 0 or 1."""
    _check_same_shape(a, b)
    for x, y in zip(a.entries, b.entries):
        if x != y:
            return -1 if x < y else 1
    return 0


def _integer_rows(rows: Sequence[Sequence]) -> list[list[int]]:
    """Scale each row by its denominator lcm; rank is unchanged."""
    from math import lcm
    out = []
    for r in rows:
        fr = [as_rational(x) for x in r]
        q = lcm(*(x.denominator for x in fr)) if fr else 1
        out.append([int(x * q) for x in fr])
    return out


def bareiss_echelon(rows: Sequence[Sequence]) -> tuple[list[list[int]], list[int]]:
    """Fraction-free Gaussian elimination.

    Returns the echelon rows (integers) and the pivot columns. Intermediate
    entries are minors of the input, so growth stays polynomial.
    """
    a = _integer_rows(rows)
    if not a:
        return [], []
    m, n = len(a), len(a[0])
    pivots: list[int] = []
    prev = 1
    r = 0
    for c in range(n):
        if r == m:
            break
        p = next((i for i in range(r, m) if a[i][c] != 0), None)
        if p is None:
            continue
        if p != r:
            a[r], a[p] = a[p], a[r]
        piv = a[r][c]
        for i in range(r + 1, m):
            f = a[i][c]
            ai, ar = a[i], a[r]
            for j in range(c + 1, n):
                ai[j] = (piv * ai[j] - f * ar[j]) // prev
            ai[c] = 0
        prev = piv
        pivots.append(c)
        r += 1
    return a[:r], pivots


def rank(a) -> int:
    """Exact rank of a RationalMatrix or of a list of rational rows."""
    rows = a.tolist() if isinstance(a, RationalMatrix) else a
    return len(bareiss_echelon(rows)[1])


def solve(a: Sequence[Sequence], b: Sequence) -> list[Fraction] | None:
    """Solve ``a x = b`` exactly for square nonsingular ``a``; None if singular."""
    n = len(a)
    aug = [[as_rational(x) for x in row] + [as_rational(bi)] for row, bi in zip(a, b)]
    if any(len(r) != n + 1 for r in aug):
        raise ValueError("solve expects a square system")
    for c in range(n):
        p = next((i for i in range(c, n) if aug[i][c] != 0), None)
        if p is None:
            return None
        aug[c], aug[p] = aug[p], aug[c]
        inv = 1 / aug[c][c]
        for i in range(n):
            if i != c and aug[i][c] != 0:
                f = aug[i][c] * inv
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[c])]
    return [aug[i][n] / aug[i][i] for i in range(n)]


def inverse(a: Sequence[Sequence]) -> list[list[Fraction]] | None:
    n = len(a)
    cols = []
    for k in range(n):
        e = [0] * n
        e[k] = 1
        x = solve(a, e)
        if x is None:
            return None
        cols.append(x)
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def nullspace_vector(rows: Sequence[Sequence], n: int) -> list[int] | None:
    """A primitive integer vector spanning the kernel when it is 1-dimensional."""
    from math import gcd
    if not rows:
        return None
    ech, piv = bareiss_echelon(rows)
    if len(piv) != n - 1:
        return None
    free = next(c for c in range(n) if c not in piv)
    # back substitution over Q, then clear denominators
    x: list[Fraction] = [Fraction(0)] * n
    x[free] = Fraction(1)
    for r in range(len(piv) - 1, -1, -1):
        c = piv[r]
        s = sum((ech[r][j] * x[j] for j in range(c + 1, n)), Fraction(0))
        x[c] = -s / ech[r][c]
    from math import lcm
    q = lcm(*(v.denominator for v in x))
    ints = [int(v * q) for v in x]
    g = 0
    for v in ints:
        g = gcd(g, v)
    return [v // g for v in ints]
