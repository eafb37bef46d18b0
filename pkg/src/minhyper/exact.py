"""Small exact linear-algebra kernel over :class:`fractions.Fraction`.

Everything here works on plain tuples/lists of Fractions so results can be
hashed and compared exactly.  Sizes are tiny (n <= 8), so clarity wins over
speed.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

ExactPoint = tuple  # tuple[Fraction, ...]


def to_fraction(value) -> Fraction:
    """Convert ints, Fractions and ``"p/q"`` strings; refuse floats."""
    if isinstance(value, bool):
        raise TypeError("booleans are not coordinates")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"exact coordinate expected, got {type(value).__name__}: {value!r}")


def point(coords: Iterable) -> ExactPoint:
    return tuple(to_fraction(c) for c in coords)


def zero(n: int) -> ExactPoint:
    return (Fraction(0),) * n


def unit(n: int, i: int) -> ExactPoint:
    """Unit vector e_i with 1-based index ``i``."""
    return tuple(Fraction(1 if k == i - 1 else 0) for k in range(n))


def dot(a: Sequence, b: Sequence) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def add(a: Sequence, b: Sequence) -> ExactPoint:
    return tuple(x + y for x, y in zip(a, b))


def sub(a: Sequence, b: Sequence) -> ExactPoint:
    return tuple(x - y for x, y in zip(a, b))


def scale(s, a: Sequence) -> ExactPoint:
    return tuple(s * x for x in a)


def matvec(m: Sequence[Sequence], v: Sequence) -> ExactPoint:
    return tuple(dot(row, v) for row in m)


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> tuple:
    cols = list(zip(*b))
    return tuple(tuple(dot(row, col) for col in cols) for row in a)


def transpose(m: Sequence[Sequence]) -> tuple:
    return tuple(tuple(col) for col in zip(*m))


def identity(n: int) -> tuple:
    return tuple(unit(n, i + 1) for i in range(n))


def row_reduce(rows: Sequence[Sequence]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form; returns (rref rows, pivot columns)."""
    m = [list(map(Fraction, r)) for r in rows]
    pivots: list[int] = []
    if not m:
        return m, pivots
    ncols = len(m[0])
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(rows: Sequence[Sequence]) -> int:
    return len(row_reduce(rows)[1]) if rows else 0


def solve_square(a: Sequence[Sequence], b: Sequence) -> ExactPoint | None:
    """Solve ``a x = b`` for square ``a``; ``None`` when singular."""
    n = len(a)
    aug = [list(row) + [rhs] for row, rhs in zip(a, b)]
    red, piv = row_reduce(aug)
    if len(piv) < n or piv[-1] >= n:
        return None
    return tuple(red[i][n] for i in range(n))


def nullspace(rows: Sequence[Sequence], ncols: int) -> list[ExactPoint]:
    """Rational basis of {x : rows x = 0}."""
    if not rows:
        return [unit(ncols, i + 1) for i in range(ncols)]
    red, piv = row_reduce(rows)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for r, pc in enumerate(piv):
            v[pc] = -red[r][f]
        basis.append(tuple(v))
    return basis


def affine_rank(points: Sequence[Sequence]) -> int:
    """Dimension of the affine hull of ``points`` (-1 for the empty set)."""
    if not points:
        return -1
    p0 = points[0]
    return rank([sub(p, p0) for p in points[1:]])


def fmt(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def parse(s: str) -> Fraction:
    return Fraction(s)
