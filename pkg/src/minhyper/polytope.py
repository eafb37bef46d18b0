"""Exact convex polytopes: cubes, the diagonal slice, its faces, spines.

A :class:`Polytope` carries both an H-representation (``normal . x <= offset``
rows; equalities appear as opposite pairs) and its exact vertex list.  Vertex
enumeration is brute force over tight-constraint subsets, which is fine for
the small polytopes used here (ambient dimension <= 8).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import exact as ex
from .exact import ExactPoint

MAX_DIM = 8

Halfspace = tuple  # (normal: ExactPoint, offset: Fraction)


class PolytopeError(ValueError):
    pass


class NonConvexError(PolytopeError):
    pass


def _check_dim(n: int, lo: int = 3) -> None:
    if not isinstance(n, int) or n < lo:
        raise PolytopeError(f"dimension must be >= {lo}, got {n!r}")
    if n > MAX_DIM:
        raise PolytopeError(f"dimension capped at {MAX_DIM}, got {n}")


def _normalize(hs: Halfspace) -> Halfspace:
    a, b = hs
    lead = next((abs(x) for x in a if x != 0), None)
    if lead is None:
        raise PolytopeError("zero normal in halfspace")
    return tuple(x / lead for x in a), b / lead


def _line_key(a: ExactPoint) -> ExactPoint:
    """Key shared by parallel and antiparallel normals."""
    lead = next(x for x in a if x != 0)
    return tuple(x / lead for x in a)


def _enumerate_vertices(n: int, halfspaces: Sequence[Halfspace]) -> list[ExactPoint]:
    norm = [_normalize(h) for h in halfspaces]
    as_set = set(norm)
    eq_rows = []
    eq_lines = set()
    for a, b in norm:
        neg = (tuple(-x for x in a), -b)
        if neg in as_set and _line_key(a) not in eq_lines:
            eq_lines.add(_line_key(a))
            eq_rows.append((a, b))
    # row basis of the equalities
    basis: list[tuple] = []
    for a, b in eq_rows:
        if ex.rank([r[0] for r in basis] + [a]) > len(basis):
            basis.append((a, b))
    need = n - len(basis)
    groups: dict[ExactPoint, list[Halfspace]] = {}
    for a, b in norm:
        key = _line_key(a)
        if key in eq_lines:
            continue
        groups.setdefault(key, [])
        if (a, b) not in groups[key]:
            groups[key].append((a, b))
    group_list = list(groups.values())
    found: set[ExactPoint] = set()
    for chosen in itertools.combinations(range(len(group_list)), need):
        rows_base = [r[0] for r in basis] + [_line_key(group_list[g][0][0]) for g in chosen]
        if ex.rank(rows_base) < n:
            continue
        for members in itertools.product(*(group_list[g] for g in chosen)):
            system = basis + list(members)
            x = ex.solve_square([s[0] for s in system], [s[1] for s in system])
            if x is None or x in found:
                continue
            if all(ex.dot(a, x) <= b for a, b in norm):
                found.add(x)
    return sorted(found)


@dataclass(frozen=True, eq=False)
class Polytope:
    """Convex polytope with mutually consistent H- and V-representation.

    Equality and hashing use the sorted vertex list only.
    """

    dim_ambient: int
    halfspaces: tuple
    vertices: tuple
    affine_hull_dim: int = field(default=-1)

    @classmethod
    def from_halfspaces(cls, halfspaces: Iterable[Halfspace]) -> "Polytope":
        hs = tuple((ex.point(a), ex.to_fraction(b)) for a, b in halfspaces)
        if not hs:
            raise PolytopeError("need at least one halfspace")
        n = len(hs[0][0])
        verts = tuple(_enumerate_vertices(n, hs))
        return cls(n, hs, verts, ex.affine_rank(list(verts)))

    @classmethod
    def from_vertices(cls, points: Iterable, strict: bool = True) -> "Polytope":
        """Exact facet enumeration inside the affine hull of ``points``.

        With ``strict`` every given point must be a vertex of the hull,
        otherwise :class:`NonConvexError` is raised.
        """
        pts = sorted(set(ex.point(p) for p in points))
        if not pts:
            raise PolytopeError("empty point set")
        n = len(pts[0])
        p0 = pts[0]
        dirs = [ex.sub(p, p0) for p in pts[1:]]
        d = ex.rank(dirs)
        # equalities for the affine hull
        hs: list[Halfspace] = []
        for nv in ex.nullspace(dirs, n) if dirs else [ex.unit(n, i + 1) for i in range(n)]:
            off = ex.dot(nv, p0)
            hs.append((nv, off))
            hs.append((tuple(-x for x in nv), -off))
        span = [tuple(r) for r in ex.row_reduce(dirs)[0]] if dirs else []
        seen = set()
        if d >= 1:
            for combo in itertools.combinations(pts, d):
                sub = [ex.sub(q, combo[0]) for q in combo[1:]]
                if ex.rank(sub) < d - 1:
                    continue
                # in-hull normal: combination of span rows orthogonal to the combo
                mat = [[ex.dot(r, s) for r in span] for s in sub]
                coeffs = ex.nullspace(mat, len(span))
                if len(coeffs) != 1:
                    continue
                nv = tuple(sum((c * r[k] for c, r in zip(coeffs[0], span)), Fraction(0))
                           for k in range(n))
                vals = [ex.dot(nv, q) for q in pts]
                off = ex.dot(nv, combo[0])
                if all(v <= off for v in vals):
                    h = _normalize((nv, off))
                elif all(v >= off for v in vals):
                    h = _normalize((tuple(-x for x in nv), -off))
                else:
                    continue
                if h not in seen:
                    seen.add(h)
                    hs.append(h)
        poly = cls.from_halfspaces(hs)
        if strict and set(poly.vertices) != set(pts):
            extra = sorted(set(pts) - set(poly.vertices))
            raise NonConvexError(f"points not in convex position, e.g. {extra[0]}")
        return poly

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polytope):
            return NotImplemented
        return self.dim_ambient == other.dim_ambient and self.vertices == other.vertices

    def __hash__(self) -> int:
        return hash((self.dim_ambient, self.vertices))

    # -- queries ---------------------------------------------------------
    def key(self) -> tuple:
        return self.vertices

    def same_set(self, other: "Polytope") -> bool:
        return self.vertices == other.vertices

    def contains(self, p: Sequence) -> bool:
        p = ex.point(p)
        return all(ex.dot(a, p) <= b for a, b in self.halfspaces)

    def centroid(self) -> ExactPoint:
        k = len(self.vertices)
        return tuple(sum(c) / k for c in zip(*self.vertices))

    def tight(self, hs: Halfspace) -> list[ExactPoint]:
        a, b = hs
        return [v for v in self.vertices if ex.dot(a, v) == b]

    def is_equality(self, hs: Halfspace) -> bool:
        return len(self.tight(hs)) == len(self.vertices)

    def facets(self) -> list["Polytope"]:
        out: dict[tuple, Polytope] = {}
        for a, b in self.halfspaces:
            t = self.tight((a, b))
            if len(t) == len(self.vertices):
                continue
            if ex.affine_rank(t) != self.affine_hull_dim - 1:
                continue
            key = tuple(t)
            if key not in out:
                hs = self.halfspaces + ((tuple(-x for x in a), -b),)
                out[key] = Polytope(self.dim_ambient, hs, key, self.affine_hull_dim - 1)
        return [out[k] for k in sorted(out)]

    def faces(self, dim: int) -> list["Polytope"]:
        """All faces of the given dimension (``dim <= affine_hull_dim``)."""
        level = {self.vertices: self}
        cur = self.affine_hull_dim
        while cur > dim:
            nxt: dict[tuple, Polytope] = {}
            for f in level.values():
                for g in f.facets():
                    nxt.setdefault(g.vertices, g)
            level = nxt
            cur -= 1
        return [level[k] for k in sorted(level)]

    def map_affine(self, matrix: Sequence[Sequence], translation: Sequence) -> "Polytope":
        """Image under ``x -> M x + t`` for orthogonal ``M`` (canonical form)."""
        hs = []
        for a, b in self.halfspaces:
            ma = ex.matvec(matrix, a)
            hs.append((ma, b + ex.dot(ma, translation)))
        verts = sorted(ex.add(ex.matvec(matrix, v), translation) for v in self.vertices)
        return Polytope(self.dim_ambient, tuple(hs), tuple(verts), self.affine_hull_dim)

    def float_halfspaces(self) -> tuple[np.ndarray, np.ndarray]:
        a = np.array([[float(x) for x in h[0]] for h in self.halfspaces])
        b = np.array([float(h[1]) for h in self.halfspaces])
        return a, b

    def float_vertices(self) -> np.ndarray:
        return np.array([[float(x) for x in v] for v in self.vertices])

    # -- serialization ---------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "dim": self.dim_ambient,
            "halfspaces": [[ex.fmt(x) for x in a] + [ex.fmt(b)] for a, b in self.halfspaces],
            "vertices": [[ex.fmt(x) for x in v] for v in self.vertices],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, doc: dict) -> "Polytope":
        hs = tuple((tuple(map(ex.parse, row[:-1])), ex.parse(row[-1])) for row in doc["halfspaces"])
        verts = tuple(sorted(tuple(map(ex.parse, v)) for v in doc["vertices"]))
        return cls(int(doc["dim"]), hs, verts, ex.affine_rank(list(verts)))

    @classmethod
    def from_json(cls, text: str) -> "Polytope":
        return cls.from_dict(json.loads(text))


def box(bounds: Sequence[tuple]) -> Polytope:
    """Axis box from per-coordinate ``(lo, hi)``; ``lo == hi`` pins the coordinate."""
    n = len(bounds)
    hs = []
    for i, (lo, hi) in enumerate(bounds):
        lo, hi = ex.to_fraction(lo), ex.to_fraction(hi)
        if lo > hi:
            raise PolytopeError(f"empty interval on axis {i + 1}")
        e = ex.unit(n, i + 1)
        hs.append((e, hi))
        hs.append((tuple(-x for x in e), -lo))
    return Polytope.from_halfspaces(hs)


def make_cube(n: int, lo=-1, hi=1) -> Polytope:
    _check_dim(n)
    lo, hi = ex.to_fraction(lo), ex.to_fraction(hi)
    if not lo < hi:
        raise PolytopeError("need lo < hi")
    return box([(lo, hi)] * n)


def _diag_equality(n: int, offset=0) -> list[Halfspace]:
    one = (Fraction(1),) * n
    return [(one, Fraction(offset)), (tuple(-x for x in one), -Fraction(offset))]


def slice_polytope(n: int) -> Polytope:
    """Slice of [-1,1]^n by the hyperplane through O orthogonal to (1,...,1)."""
    _check_dim(n)
    cube = make_cube(n)
    return Polytope.from_halfspaces(cube.halfspaces + tuple(_diag_equality(n)))


def face_B(n: int, i: int, sign: int | str) -> Polytope:
    """The facet of the slice polytope on ``{x_i = +-1}``."""
    _check_dim(n)
    if not 1 <= i <= n:
        raise PolytopeError(f"face index {i} out of range 1..{n}")
    s = _sign(sign)
    base = slice_polytope(n)
    e = ex.unit(n, i)
    hs = base.halfspaces + ((tuple(-s * x for x in e), Fraction(-1)),)
    return Polytope.from_halfspaces(hs)


def _sign(sign) -> int:
    if sign in (1, "+", "plus"):
        return 1
    if sign in (-1, "-", "−", "minus"):
        return -1
    raise PolytopeError(f"sign must be + or -, got {sign!r}")


def project_to_hyperplane(p: Sequence, normal: Sequence) -> ExactPoint:
    """Orthogonal projection onto the linear hyperplane ``normal . x = 0``."""
    p, nv = ex.point(p), ex.point(normal)
    nn = ex.dot(nv, nv)
    if nn == 0:
        raise PolytopeError("zero normal")
    return ex.sub(p, ex.scale(ex.dot(nv, p) / nn, nv))


def _in_skeleton(face: Polytope, n: int, pinned: int) -> bool:
    """True when at least ``pinned`` coordinates are +-1 on the whole face."""
    count = 0
    for k in range(n):
        vals = {v[k] for v in face.vertices}
        if len(vals) == 1 and abs(next(iter(vals))) == 1:
            count += 1
    return count >= pinned


@dataclass(frozen=True)
class ConeComplex:
    """Union of cones ``apex x F`` over polytopal base faces ``F``."""

    apex: ExactPoint
    base_faces: tuple
    hyperplane: tuple | None = None  # (normal, offset) or None

    def __post_init__(self):
        if self.hyperplane is not None:
            a, b = self.hyperplane
            if ex.dot(a, self.apex) != b:
                raise PolytopeError("apex off the ambient hyperplane")
            for f in self.base_faces:
                if any(ex.dot(a, v) != b for v in f.vertices):
                    raise PolytopeError("base face off the ambient hyperplane")

    @property
    def dim_ambient(self) -> int:
        return len(self.apex)

    def key(self) -> tuple:
        return (self.apex, tuple(sorted(f.vertices for f in self.base_faces)))

    def cone_contains(self, face: Polytope, p: Sequence) -> bool:
        p = ex.point(p)
        if p == self.apex:
            return True
        lo, hi = Fraction(0), Fraction(1)
        lo_open = True
        d = ex.sub(p, self.apex)
        for a, c in face.halfspaces:
            alpha = c - ex.dot(a, self.apex)
            beta = ex.dot(a, d)
            if alpha > 0:
                t = beta / alpha
                if t > lo or (t == lo and lo_open):
                    lo, lo_open = t, False
            elif alpha < 0:
                hi = min(hi, beta / alpha)
            elif beta > 0:
                return False
            if lo > hi or (lo == hi and lo_open):
                return False
        return True

    def contains(self, p: Sequence) -> bool:
        return any(self.cone_contains(f, p) for f in self.base_faces)

    def cones(self) -> list[tuple]:
        """Vertex lists ``(apex, *base vertices)`` of each cone."""
        return [(self.apex,) + f.vertices for f in self.base_faces]

    def vertices(self) -> list[ExactPoint]:
        out = {self.apex}
        for f in self.base_faces:
            out.update(f.vertices)
        return sorted(out)

    def map_affine(self, matrix, translation) -> "ConeComplex":
        apex = ex.add(ex.matvec(matrix, self.apex), translation)
        faces = tuple(sorted((f.map_affine(matrix, translation) for f in self.base_faces),
                             key=lambda f: f.vertices))
        hp = None
        if self.hyperplane is not None:
            a, b = self.hyperplane
            ma = ex.matvec(matrix, a)
            hp = (ma, b + ex.dot(ma, translation))
        return ConeComplex(apex, faces, hp)


def _hyperplane_through(points: list[ExactPoint]) -> tuple | None:
    n = len(points[0])
    dirs = [ex.sub(p, points[0]) for p in points[1:]]
    ns = ex.nullspace(dirs, n)
    if len(ns) != 1:
        return None
    nv = ns[0]
    return nv, ex.dot(nv, points[0])


def cone_complex(apex: Sequence, faces: Sequence[Polytope]) -> ConeComplex:
    apex = ex.point(apex)
    faces = tuple(sorted(faces, key=lambda f: f.vertices))
    pts = [apex] + [v for f in faces for v in f.vertices]
    return ConeComplex(apex, faces, _hyperplane_through(pts))


def spine(n: int) -> ConeComplex:
    """Cone from O over the part of the slice boundary in the (n-2)-skeleton."""
    p = slice_polytope(n)
    ridges = [f for f in p.faces(n - 3) if _in_skeleton(f, n, 2)]
    return cone_complex(ex.zero(n), ridges)


def gamma1(n: int) -> tuple[ConeComplex, ConeComplex]:
    """Boundary cycle of the P-piece: cones from O and (2,0,...,0) over dB_1^+."""
    _check_dim(n)
    b = face_B(n, 1, +1)
    ridges = b.faces(n - 3)
    o_hat = (Fraction(2),) + (Fraction(0),) * (n - 1)
    return cone_complex(ex.zero(n), ridges), cone_complex(o_hat, ridges)


def cone_boundary_cycle(cones: Iterable[ConeComplex]) -> dict[tuple, int]:
    """Mod-2 boundary of a union of cones; empty dict means a closed cycle."""
    counts: dict[tuple, int] = {}

    def bump(piece: tuple) -> None:
        counts[piece] = counts.get(piece, 0) ^ 1

    for cc in cones:
        for f in cc.base_faces:
            bump(f.vertices)
            subfaces = f.facets() if f.affine_hull_dim > 0 else []
            if f.affine_hull_dim == 0:
                bump((cc.apex,))
            for g in subfaces:
                bump(tuple(sorted((cc.apex,) + g.vertices)))
    return {k: v for k, v in counts.items() if v}


def unit_cube_face(n: int, fixed: dict[int, int]) -> Polytope:
    """Face of [0,1]^n with coordinates ``fixed`` (1-based index -> 0/1)."""
    bounds = []
    for i in range(1, n + 1):
        if i in fixed:
            bounds.append((fixed[i], fixed[i]))
        else:
            bounds.append((0, 1))
    return box(bounds)


def skeleton_cubes(n: int) -> list[tuple[dict, Polytope]]:
    """All (n-2)-dimensional faces of [0,1]^n."""
    _check_dim(n)
    out = []
    for i, j in itertools.combinations(range(1, n + 1), 2):
        for a, b in itertools.product((0, 1), repeat=2):
            fixed = {i: a, j: b}
            out.append((fixed, unit_cube_face(n, fixed)))
    return out


def gamma2(n: int) -> list[Polytope]:
    """(n-2)-cubes of [0,1]^n touching neither (0,...,0) nor (1,...,1)."""
    _check_dim(n)
    p0, p1 = ex.zero(n), (Fraction(1),) * n
    return [c for _, c in skeleton_cubes(n) if p0 not in c.vertices and p1 not in c.vertices]


def d_domain(n: int, enumerate: bool = False) -> Polytope:
    """Projection of [0,1]^n onto the hyperplane orthogonal to (1,...,1).

    It is the zonotope ``{y : sum y = 0, y_i - y_j <= 1}``.
    Vertices are the projections of the cube vertices other than the two
    poles; pass ``enumerate=True`` to recompute them from the halfspaces.
    """
    _check_dim(n)
    hs = list(_diag_equality(n))
    for i, j in itertools.permutations(range(1, n + 1), 2):
        a = ex.sub(ex.unit(n, i), ex.unit(n, j))
        hs.append((a, Fraction(1)))
    if enumerate:
        return Polytope.from_halfspaces(hs)
    ones = (Fraction(1),) * n
    verts = sorted(
        project_to_hyperplane(v, ones)
        for v in itertools.product((Fraction(0), Fraction(1)), repeat=n)
        if 0 < sum(v) < n
    )
    return Polytope(n, tuple(hs), tuple(verts), n - 1)


def p_domain(n: int = 4) -> Polytope:
    """Projection of the double cone (O x B_1^+) u (O^ x B_1^+) onto {x_2+...+x_n = 0}."""
    _check_dim(n)
    nv = (Fraction(0),) + (Fraction(1),) * (n - 1)
    b = face_B(n, 1, +1)
    o_hat = (Fraction(2),) + (Fraction(0),) * (n - 1)
    pts = [ex.zero(n), o_hat] + [project_to_hyperplane(v, nv) for v in b.vertices]
    return Polytope.from_vertices(pts)


@dataclass(frozen=True)
class Hyperplane:
    """Affine hyperplane ``normal . x = offset``."""

    normal: ExactPoint
    offset: Fraction

    def __post_init__(self):
        object.__setattr__(self, "normal", ex.point(self.normal))
        object.__setattr__(self, "offset", ex.to_fraction(self.offset))
        if not any(self.normal):
            raise PolytopeError("zero normal")

    def key(self) -> tuple:
        # sign-normalized so opposite orientations compare equal
        a, b = _normalize((self.normal, self.offset))
        lead = next(x for x in self.normal if x != 0)
        if lead < 0:
            a, b = tuple(-x for x in a), -b
        first = next(x for x in a if x != 0)
        if first < 0:
            a, b = tuple(-x for x in a), -b
        return a, b

    def contains(self, p: Sequence) -> bool:
        return ex.dot(self.normal, ex.point(p)) == self.offset

    def map_affine(self, matrix, translation) -> "Hyperplane":
        ma = ex.matvec(matrix, self.normal)
        return Hyperplane(ma, self.offset + ex.dot(ma, translation))

    def sample_points(self) -> list[ExactPoint]:
        """A point on the plane plus that point shifted along a basis of the plane."""
        n = len(self.normal)
        nn = ex.dot(self.normal, self.normal)
        base = ex.scale(self.offset / nn, self.normal)
        return [base] + [ex.add(base, v) for v in ex.nullspace([self.normal], n)]


def diagonal_hyperplane(n: int) -> Hyperplane:
    return Hyperplane((Fraction(1),) * n, Fraction(0))
