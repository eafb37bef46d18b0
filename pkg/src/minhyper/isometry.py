"""Exact rigid motions of R^n and invariance checking.

An :class:`Isometry` is ``x -> M x + t`` with a rational orthogonal ``M``.
All constructors used by the surface constructions (coordinate permutations,
180-degree rotations about codimension-2 planes, reflections, the antipodal
map, translations) have rational entries, so every verdict is exact.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import exact as ex
from .exact import ExactPoint
from .polytope import ConeComplex, Hyperplane, Polytope, cone_complex, face_B, gamma1


class IsometryError(ValueError):
    pass


@dataclass(frozen=True)
class Isometry:
    matrix: tuple
    translation: tuple

    def __post_init__(self):
        m = tuple(tuple(ex.to_fraction(x) for x in row) for row in self.matrix)
        t = tuple(ex.to_fraction(x) for x in self.translation)
        n = len(m)
        if any(len(row) != n for row in m) or len(t) != n:
            raise IsometryError("matrix must be square and match translation length")
        if ex.matmul(ex.transpose(m), m) != ex.identity(n):
            raise IsometryError("matrix is not orthogonal")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "translation", t)

    @property
    def n(self) -> int:
        return len(self.matrix)

    def __call__(self, x: Sequence) -> ExactPoint:
        return ex.add(ex.matvec(self.matrix, ex.point(x)), self.translation)

    def det(self) -> int:
        return int(round(np.linalg.det(self.float_matrix())))

    def inverse(self) -> "Isometry":
        mt = ex.transpose(self.matrix)
        return Isometry(mt, tuple(-x for x in ex.matvec(mt, self.translation)))

    def is_identity(self) -> bool:
        return self.matrix == ex.identity(self.n) and not any(self.translation)

    def float_matrix(self) -> np.ndarray:
        return np.array(self.matrix, dtype=float)

    def float_translation(self) -> np.ndarray:
        return np.array(self.translation, dtype=float)

    def apply_float(self, pts: np.ndarray) -> np.ndarray:
        return pts @ self.float_matrix().T + self.float_translation()

    def __matmul__(self, other: "Isometry") -> "Isometry":
        return compose(self, other)


@dataclass(frozen=True)
class FloatMotion:
    """Rigid motion with floating-point entries, for irrational angles."""

    matrix: np.ndarray
    translation: np.ndarray

    def apply_float(self, pts: np.ndarray) -> np.ndarray:
        return pts @ self.matrix.T + self.translation

    def __matmul__(self, other) -> "FloatMotion":
        m = other.float_matrix() if isinstance(other, Isometry) else other.matrix
        t = other.float_translation() if isinstance(other, Isometry) else other.translation
        return FloatMotion(self.matrix @ m, self.matrix @ t + self.translation)

    def float_matrix(self) -> np.ndarray:
        return self.matrix

    def float_translation(self) -> np.ndarray:
        return self.translation


def compose(a: Isometry, b: Isometry) -> Isometry:
    """``compose(a, b)(x) == a(b(x))``."""
    if a.n != b.n:
        raise IsometryError("dimension mismatch")
    m = ex.matmul(a.matrix, b.matrix)
    t = ex.add(ex.matvec(a.matrix, b.translation), a.translation)
    return Isometry(m, t)


def identity(n: int) -> Isometry:
    return Isometry(ex.identity(n), ex.zero(n))


def perm_isometry(perm: Sequence[int]) -> Isometry:
    """Permutation matrix sending e_i to e_perm[i-1] (1-based images)."""
    n = len(perm)
    if sorted(perm) != list(range(1, n + 1)):
        raise IsometryError(f"not a permutation of 1..{n}: {perm!r}")
    m = [[Fraction(0)] * n for _ in range(n)]
    for i, p in enumerate(perm):
        m[p - 1][i] = Fraction(1)
    return Isometry(tuple(map(tuple, m)), ex.zero(n))


def swap(n: int, i: int, j: int) -> Isometry:
    perm = list(range(1, n + 1))
    perm[i - 1], perm[j - 1] = perm[j - 1], perm[i - 1]
    return perm_isometry(perm)


def rho_K(n: int, i: int, j: int) -> Isometry:
    """Half-turn about ``{x_i + x_j = 0} n {x_1 + ... + x_n = 0}``.

    With ``u = e_i + e_j`` and ``v`` the indicator of the other coordinates,
    the foot of the perpendicular is ``x - (u.x/2) u - (v.x/(n-2)) v`` and the
    image is its reflection through that foot.
    """
    if i == j:
        raise IsometryError("i and j must differ")
    if not (1 <= i <= n and 1 <= j <= n) or n < 3:
        raise IsometryError("indices out of range")
    u = [Fraction(1 if k in (i - 1, j - 1) else 0) for k in range(n)]
    v = [Fraction(0 if k in (i - 1, j - 1) else 1) for k in range(n)]
    c = Fraction(2, n - 2)
    m = tuple(
        tuple(Fraction(int(r == s)) - u[r] * u[s] - c * v[r] * v[s] for s in range(n))
        for r in range(n)
    )
    return Isometry(m, ex.zero(n))


def rho_face(n: int, i: int) -> Isometry:
    """Half-turn about ``{x_1 = 1} n {x_i = 0}``."""
    if i == 1:
        raise IsometryError("axis degenerates for i = 1")
    if not 2 <= i <= n:
        raise IsometryError("index out of range")
    diag = [Fraction(1)] * n
    diag[0] = diag[i - 1] = Fraction(-1)
    m = tuple(tuple(diag[r] if r == s else Fraction(0) for s in range(n)) for r in range(n))
    t = (Fraction(2),) + (Fraction(0),) * (n - 1)
    return Isometry(m, t)


def reflect(n: int, i: int, offset=0) -> Isometry:
    """Reflection across ``{x_i = offset}``."""
    if not 1 <= i <= n:
        raise IsometryError("index out of range")
    diag = [Fraction(1)] * n
    diag[i - 1] = Fraction(-1)
    m = tuple(tuple(diag[r] if r == s else Fraction(0) for s in range(n)) for r in range(n))
    t = [Fraction(0)] * n
    t[i - 1] = 2 * ex.to_fraction(offset)
    return Isometry(m, tuple(t))


def translate(v: Sequence) -> Isometry:
    v = ex.point(v)
    return Isometry(ex.identity(len(v)), v)


def antipodal(n: int) -> Isometry:
    return Isometry(tuple(tuple(Fraction(-int(r == s)) for s in range(n)) for r in range(n)),
                    ex.zero(n))


def apply(iso, obj):
    """Image of a point, polytope, cone complex or hyperplane (canonical form)."""
    if isinstance(obj, Polytope):
        _match(iso, obj.dim_ambient)
        return obj.map_affine(iso.matrix, iso.translation)
    if isinstance(obj, ConeComplex):
        _match(iso, obj.dim_ambient)
        return obj.map_affine(iso.matrix, iso.translation)
    if isinstance(obj, Hyperplane):
        _match(iso, len(obj.normal))
        return obj.map_affine(iso.matrix, iso.translation)
    if isinstance(obj, (tuple, list)):
        _match(iso, len(obj))
        return iso(obj)
    raise TypeError(f"cannot apply isometry to {type(obj).__name__}")


def _match(iso: Isometry, n: int) -> None:
    if iso.n != n:
        raise IsometryError(f"dimension mismatch: isometry on R^{iso.n}, object in R^{n}")


@dataclass
class Verdict:
    claim: str
    n: int
    holds: bool
    witness: ExactPoint | None = None
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"claim": self.claim, "n": self.n, "holds": self.holds}
        if self.witness is not None:
            out["witness"] = [ex.fmt(x) for x in self.witness]
        if self.details:
            out["details"] = self.details
        return out


def _contains(obj, p) -> bool:
    return obj.contains(p)


def check_invariant(iso: Isometry, obj, claim: str = "invariant") -> Verdict:
    """Exact test of ``iso(obj) == obj`` as point sets.

    On failure the witness is the lexicographically smallest vertex of the
    image lying outside ``obj``.
    """
    img = apply(iso, obj)
    n = iso.n
    if isinstance(obj, Hyperplane):
        if img.key() == obj.key():
            return Verdict(claim, n, True)
        p = next(q for q in sorted(img.sample_points()) if not obj.contains(q))
        return Verdict(claim, n, False, p)
    if isinstance(obj, Polytope):
        if img.vertices == obj.vertices:
            return Verdict(claim, n, True)
        cands = list(img.vertices)
    elif isinstance(obj, ConeComplex):
        if img.key() == obj.key():
            return Verdict(claim, n, True)
        cands = img.vertices() + sorted(f.centroid() for f in img.base_faces)
    else:
        raise TypeError(f"unsupported object {type(obj).__name__}")
    for p in sorted(cands):
        if not _contains(obj, p):
            return Verdict(claim, n, False, p)
    # image inside the object but not equal: witness from the other side
    back = obj.vertices() if isinstance(obj, ConeComplex) else list(obj.vertices)
    for p in sorted(back):
        if not _contains(img, p):
            return Verdict(claim, n, False, p, {"witness_side": "object_not_in_image"})
    return Verdict(claim, n, True, details={"note": "decompositions differ, point sets agree on vertices"})


def cone_over_boundary(n: int, i: int, sign) -> ConeComplex:
    """``O x dB_i^{sign}``."""
    b = face_B(n, i, sign)
    return cone_complex(ex.zero(n), b.faces(n - 3))


def check_cone_obstruction(n: int) -> Verdict:
    """Does the half-turn about K_12 carry ``O x dB_1^+`` onto ``O x dB_2^-``?"""
    src = cone_over_boundary(n, 1, +1)
    dst = cone_over_boundary(n, 2, -1)
    rho = rho_K(n, 1, 2)
    v = check_invariant_pair(rho, src, dst, "rho_K12(O x dB_1^+) = O x dB_2^-")
    if v.witness is not None:
        pre = rho.inverse()(v.witness)
        # sum of 2nd and k-th image components, per k >= 3
        v.details["preimage"] = [ex.fmt(x) for x in pre]
        v.details["second_plus_kth"] = {
            str(k): ex.fmt(v.witness[1] + v.witness[k - 1]) for k in range(3, n + 1)
        }
    return v


def check_invariant_pair(iso: Isometry, src, dst, claim: str) -> Verdict:
    """Exact test of ``iso(src) == dst``; witness lies in the image, outside ``dst``."""
    img = apply(iso, src)
    n = iso.n
    if img.key() == dst.key():
        return Verdict(claim, n, True)
    cands = img.vertices() + sorted(f.centroid() for f in img.base_faces)
    for p in sorted(cands):
        if not dst.contains(p):
            return Verdict(claim, n, False, p)
    return Verdict(claim, n, False, details={"note": "decompositions differ"})


def hyperplane_table(n: int, i: int, j: int) -> dict:
    """Images of ``{x_k = 1}`` under rho_K(n,i,j) compared with every ``{x_l = -1}``."""
    rho = rho_K(n, i, j)
    table = {}
    for k in range(1, n + 1):
        img = apply(rho, Hyperplane(ex.unit(n, k), Fraction(1)))
        matches = [l for l in range(1, n + 1)
                   if img.key() == Hyperplane(ex.unit(n, l), Fraction(-1)).key()]
        table[str(k)] = matches
    return table


# -- groups ---------------------------------------------------------------

@dataclass
class GroupSpec:
    generators: list
    name: str = "custom"

    def elements(self, limit: int = 200_000) -> list[Isometry]:
        """Closure of the generators under composition (BFS, deterministic order)."""
        n = self.generators[0].n
        e = identity(n)
        seen = {(e.matrix, e.translation): e}
        frontier = [e]
        while frontier:
            nxt = []
            for g in frontier:
                for s in self.generators:
                    h = compose(s, g)
                    key = (h.matrix, h.translation)
                    if key not in seen:
                        seen[key] = h
                        nxt.append(h)
                        if len(seen) > limit:
                            raise IsometryError("group closure exceeded limit (infinite group?)")
            frontier = nxt
        return [seen[k] for k in sorted(seen)]

    def order(self) -> int:
        return len(self.elements())


def _transpositions(n: int, first: int = 1) -> list[Isometry]:
    return [swap(n, k, k + 1) for k in range(first, n)]


def group_G1(n: int) -> GroupSpec:
    return GroupSpec(_transpositions(n), "G1")


def group_G0(n: int) -> GroupSpec:
    return GroupSpec(_transpositions(n, first=2), "G0")


def group_G2(n: int) -> GroupSpec:
    return GroupSpec(_transpositions(n) + [antipodal(n)], "G2")


def expected_order(name: str, n: int) -> int:
    f = math.factorial
    return {"G0": f(n - 1), "G1": f(n), "G2": 2 * f(n)}[name]


def orbit(elements: Iterable[Isometry], obj) -> list:
    """Distinct images of ``obj`` (by canonical key), in deterministic order."""
    out = {}
    for g in elements:
        img = apply(g, obj)
        key = img.key() if hasattr(img, "key") else img
        out.setdefault(key, img)
    return [out[k] for k in sorted(out)]
