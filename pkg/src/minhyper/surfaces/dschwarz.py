"""Schwarz D type hypersurfaces in R^n.

``Sigma_5`` is the minimal graph over the projection of [0,1]^n along
(1,...,1) spanning the (n-2)-cubes of the cube skeleton that avoid both
poles.  Copies ``Lambda_S(Sigma_5)`` (coordinate sign changes with ``|S|``
even) fill the black subcubes of [-1,1]^n; translations by 2 e_i complete
the surface.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
from scipy.spatial import cKDTree

from .. import exact as ex
from ..isometry import Isometry, apply, compose, group_G1, rho_face, translate
from ..msesolver import BoundaryData, GridFunction, discretize, solve_mse
from ..polytope import d_domain, gamma2
from .mesh import PatchMesh, mesh_graph
from .verify import (Check, PeriodicSurface, VerificationReport, seam_dihedral,
                     verify_embedded_sample)


class DError(ValueError):
    pass


def _require_dim(n: int) -> None:
    if not 3 <= n <= 6:
        raise DError(f"the D construction is set up for 3 <= n <= 6, got n = {n}")


def d_height(v) -> float:
    """Height along (1,...,1)/sqrt n of the cube vertex projecting to ``v``.

    A projected 0/1 vertex with ``k`` ones has entries ``-k/n`` and
    ``1 - k/n``, so it lifts to height ``k / sqrt n = -sqrt n min(v)``.
    """
    return -float(min(v)) * math.sqrt(len(v))


def solve_d_graph(n: int, h, tol: float = 1e-10, perturb: float = 0.0) -> GridFunction:
    _require_dim(n)
    dom = d_domain(n)
    grid = discretize(dom, h, normal=(1,) * n)
    data = BoundaryData.piecewise_linear(dom, d_height, description="Gamma_2")
    if perturb:
        c = np.array([[float(x) for x in v] for v in grid.facets[0][2]]).mean(0)

        def bump(pos, fid):
            r = np.linalg.norm(pos - c, axis=1)
            return perturb * np.maximum(0.0, 1 - 4 * r) * (fid == 0)

        data = data.with_bump(bump)
    return solve_mse(grid, data, tol=tol)


def facet_cube(a) -> tuple[int, int]:
    """``(i, j)`` (1-based) for the facet ``y_i - y_j <= 1``, the image of {x_i = 1, x_j = 0}."""
    i = next(k for k, x in enumerate(a) if x > 0) + 1
    j = next(k for k, x in enumerate(a) if x < 0) + 1
    return i, j


def cube_label(i: int, j: int) -> str:
    return f"x{i}=1,x{j}=0"


def build_d_fundamental(n: int, h, tol: float = 1e-10, gf: GridFunction | None = None) -> PatchMesh:
    """Sigma_5 lifted to R^n; boundary facets tagged by their cube of Gamma_2."""
    _require_dim(n)
    gf = gf or solve_d_graph(n, h, tol)
    labels = {fid: cube_label(*facet_cube(a)) for fid, (a, _, _) in enumerate(gf.grid.facets)}
    mesh = mesh_graph(gf, labels=labels)
    mesh.info["gf"] = gf
    return mesh


# -- checkerboard -----------------------------------------------------------------------


def black_vertices(n: int) -> list[tuple]:
    """The apex set L: sign vectors with an even number of -1 (2^(n-1) of them)."""
    return [s for s in itertools.product((1, -1), repeat=n) if s.count(-1) % 2 == 0]


def sign_map(s) -> Isometry:
    n = len(s)
    m = tuple(tuple(Fraction(s[r]) if r == c else Fraction(0) for c in range(n)) for r in range(n))
    return Isometry(m, ex.zero(n))


def is_black(center) -> bool:
    """Black cells of the period-2 checkerboard of unit cubes, by cube centre."""
    return sum(math.floor(c) for c in center) % 2 == 0


def assemble_d(n: int, h, tol: float = 1e-10, sigma5: PatchMesh | None = None) -> PeriodicSurface:
    """Sigma_6 = union of Sigma_{O, q} for q in L; lattice 2 e_i."""
    _require_dim(n)
    sigma5 = sigma5 or build_d_fundamental(n, h, tol)
    L = black_vertices(n)
    patches = [("sigma5", sign_map(s)) for s in L]
    lattice = [ex.scale(2, ex.unit(n, i + 1)) for i in range(n)]
    return PeriodicSurface("D", {"n": n, "h": str(h), "tol": tol}, {"sigma5": sigma5}, patches,
                           lattice, {"L": L})


def _cube_key(fixed: dict, signs: dict) -> frozenset:
    """Vertex set of a unit cube: ``fixed`` coordinates and free coordinates on [0, s]."""
    n = len(fixed) + len(signs)
    free = sorted(signs)
    out = []
    for bits in itertools.product((0, 1), repeat=len(free)):
        v = [Fraction(0)] * n
        for k, val in fixed.items():
            v[k] = Fraction(val)
        for k, b in zip(free, bits):
            v[k] = Fraction(b * signs[k])
        out.append(tuple(v))
    return frozenset(out)


def boundary_identity(n: int) -> dict:
    """Exact comparison of the union of the copies' Gamma_2 with the cubes of
    ``d(2Q) n U{x_i = 0}`` (unit (n-2)-cubes, one coordinate 0 and one +-1)."""
    lhs: list = []
    for s in black_vertices(n):
        M = sign_map(s)
        for c in gamma2(n):
            lhs.append(frozenset(M(v) for v in c.vertices))
    rhs = set()
    for i, j in itertools.permutations(range(n), 2):
        rest = [k for k in range(n) if k not in (i, j)]
        for sig in (1, -1):
            for signs in itertools.product((1, -1), repeat=len(rest)):
                rhs.add(_cube_key({i: 0, j: sig}, dict(zip(rest, signs))))
    return {"lhs": len(lhs), "lhs_distinct": len(set(lhs)), "rhs": len(rhs),
            "expected": n * (n - 1) * 2 ** (n - 1), "equal": set(lhs) == rhs}


def seam_bar(n: int, q: tuple) -> list[tuple]:
    """All ``(i, qbar)`` with ``qbar`` in L and ``tau(q) = rho_i(qbar)``."""
    tau = translate(ex.scale(2, ex.unit(n, 1)))
    out = []
    L = {tuple(Fraction(x) for x in s) for s in black_vertices(n)}
    tq = tau(tuple(Fraction(x) for x in q))
    for i in range(2, n + 1):
        r = rho_face(n, i)
        qb = r.inverse()(tq)
        if qb in L:
            out.append((i, qb))
    return out


def _near(points: np.ndarray, center, radius: float) -> np.ndarray:
    return points[np.linalg.norm(points - np.asarray(center, dtype=float), axis=1) <= radius]


def _set_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Symmetric max nearest-point distance between two point sets."""
    if len(a) == 0 or len(b) == 0:
        return math.inf
    da, _ = cKDTree(b).query(a)
    db, _ = cKDTree(a).query(b)
    return float(max(da.max(), db.max()))


def _boundary_label_plane(label: str, s) -> tuple[int, int, int]:
    """``(i, j, value)``: the copy under signs ``s`` of cube ``label`` lies in {x_i = value, x_j = 0}."""
    a, b = label.split(",")
    i, j = int(a[1:a.index("=")]), int(b[1:b.index("=")])
    return i, j, s[i - 1]


def _tangency(mesh: PatchMesh, i: int, h: float) -> dict:
    """Tangent plane of Sigma_5 at q_i^+ from the boundary and from the first cell ring.

    Near q_i^+ the boundary lies in {x_i = 1} and spans it, which fixes the
    tangent plane there; the fitted slope of x_i over those boundary vertices
    is the reported gradient.  The tilt of the cells incident to q_i^+ is
    recorded alongside.
    """
    n = mesh.n
    q = np.zeros(n)
    q[i - 1] = 1.0
    d = np.linalg.norm(mesh.vertices - q, axis=1)
    vq = int(np.argmin(d))
    if d[vq] > 1e-12:
        raise DError(f"q_{i}^+ is not a mesh vertex")
    bverts = np.unique(np.concatenate([f.ravel() for f in mesh.tags.values()]))
    near = bverts[np.linalg.norm(mesh.vertices[bverts] - q, axis=1) <= 2.5 * h]
    P = mesh.vertices[near]
    others = [k for k in range(n) if k != i - 1]
    A = np.hstack([P[:, others] - q[others], np.ones((len(P), 1))])
    coef, *_ = np.linalg.lstsq(A, P[:, i - 1] - 1.0, rcond=None)
    grad = float(np.linalg.norm(coef[:-1]))
    cells = np.nonzero(np.any(mesh.cells == vq, axis=1))[0]
    sub = PatchMesh(n, mesh.vertices, mesh.cells[cells])
    tilt = np.sqrt(np.clip(1 - sub.cell_normals()[:, i - 1] ** 2, 0, None))
    return {"gradient": grad, "boundary_points": len(P), "ring_cells": len(cells),
            "ring_tilt_max": float(tilt.max()), "ring_tilt_mean": float(tilt.mean())}


def verify_d(surface: PeriodicSurface, samples: int = 2000, seed: int = 0) -> VerificationReport:
    rep = VerificationReport()
    sigma5: PatchMesh = surface.base["sigma5"]
    gf: GridFunction = sigma5.info["gf"]
    n = surface.params["n"]
    h = float(gf.grid.h)
    tol = surface.params.get("tol", 1e-10)
    L = surface.extras["L"]

    lo, hi = float(sigma5.vertices.min()), float(sigma5.vertices.max())
    rep.add(Check("D: Sigma_5 inside [0,1]^n", "containment", lo >= -1e-12 and hi <= 1 + 1e-12,
                  max(-lo, hi - 1, 0.0), 1e-12))

    perms = group_G1(n).elements()
    worst = max(gf.invariance_defect(g.matrix) for g in perms)
    rep.add(Check("D: Sigma_5 invariant under coordinate permutations", "permutation invariance",
                  worst <= 10 * tol, worst, 10 * tol, {"elements": len(perms)}))

    neg = tuple(tuple(Fraction(-int(r == c)) for c in range(n)) for r in range(n))
    cdef = gf.invariance_defect(neg, sign=-1.0, shift=math.sqrt(n))
    rep.add(Check("D: Sigma_5 symmetric about the cube centre", "x -> 1 - x swaps F^0 and F^1",
                  cdef <= 10 * tol, cdef, 10 * tol))

    rep.add(Check("D: |L| = 2^(n-1)", "apex set", len(L) == 2 ** (n - 1), len(L), 2 ** (n - 1)))

    bid = boundary_identity(n)
    ok = bid["equal"] and bid["lhs"] == bid["lhs_distinct"] == bid["rhs"] == bid["expected"]
    rep.add(Check("D: boundary of Sigma_6 equals d(2Q) n U{x_i = 0} (exact cubes)", "boundary identity",
                  ok, bid["lhs_distinct"], bid["expected"], bid))

    worst_b, untagged = 0.0, sigma5.info.get("untagged_boundary", 0)
    for k in range(len(surface.patches)):
        m = surface.mesh(k)
        for lab, f in m.tags.items():
            x = np.abs(m.vertices[np.unique(f)])
            dist = np.abs(x.min(1)) + np.abs(x.max(1) - 1.0)
            worst_b = max(worst_b, float(dist.max()))
    rep.add(Check("D: mesh boundary of Sigma_6 on d(2Q) n U{x_i = 0}", "boundary identity",
                  worst_b <= 5 * h * h and untagged == 0, worst_b, 5 * h * h,
                  {"untagged_facets": untagged}))

    tang = {i: _tangency(sigma5, i, h) for i in range(1, n + 1)}
    g = max(t["gradient"] for t in tang.values())
    rep.add(Check("D: Sigma_5 tangent to F_i^1 at q_i^+", "tangency at face centres",
                  g <= math.sqrt(tol), g, math.sqrt(tol), {f"q_{i}": t for i, t in tang.items()}))

    # exact parity and seam identities
    rr = [(i, j) for i in range(2, n + 1) for j in range(2, n + 1) if i < j]
    lam = {i: sign_map(tuple(-1 if k == i - 1 else 1 for k in range(n))) for i in range(1, n + 1)}
    ident = all(compose(rho_face(n, i), rho_face(n, j)) == compose(lam[i], lam[j]) for i, j in rr)
    centers = [tuple(Fraction(s, 2) for s in c) for c in itertools.product((1, -1), repeat=n)]
    black = [c for c in centers if is_black(c)]
    closed = all(is_black(compose(rho_face(n, i), rho_face(n, j))(c)) for i, j in rr for c in black)
    even_t = all(is_black(translate(ex.scale(2, ex.unit(n, k)))(c)) for k in range(1, n + 1) for c in black)
    odd_t = all(not is_black(translate(ex.unit(n, k))(c)) for k in range(1, n + 1) for c in black)
    rep.add(Check("D: rho_i o rho_j = lambda_i o lambda_j", "face rotations", ident, None, None,
                  {"pairs": len(rr)}))
    rep.add(Check("D: checkerboard parity (rho_i rho_j and even translations keep black, odd swap)",
                  "alternating checkerboard", closed and even_t and odd_t and len(black) == 2 ** (n - 1),
                  None, None, {"rho_pairs": closed, "even": even_t, "odd": odd_t}))

    tau = translate(ex.scale(2, ex.unit(n, 1)))
    seam_ok, pairs = True, []
    for q in (s for s in L if s[0] == -1):
        bars = seam_bar(n, q)
        seam_ok &= bool(bars)
        for i, qb in bars:
            g_iso = compose(compose(rho_face(n, i), sign_map(qb)).inverse(),
                            compose(tau, sign_map(q)))
            cubes = {c.key() for c in gamma2(n)}
            keeps = {apply(g_iso, c).key() for c in gamma2(n)} == cubes
            seam_ok &= keeps
            pairs.append({"q": list(q), "i": i, "qbar": [int(x) for x in qb], "preserves_gamma2": keeps})
    rep.add(Check("D: tau(Sigma_{O,q}) = rho_i(Sigma_{O,qbar}) for q in L n {x_1 = -1}",
                  "translation continues Sigma_6", seam_ok, None, None, {"pairs": pairs}))

    q1 = np.zeros(n)
    q1[0] = 1.0
    six = surface.meshes()
    shifted = [m.transformed(tau) for m in six]
    r_ball = 0.5

    def seam_points(meshes):
        pts = [m.vertices[np.unique(f)] for m in meshes for lab, f in m.tags.items()]
        pts = np.vstack(pts)
        on = np.abs(pts[:, 0] - 1.0) < 1e-12
        return _near(pts[on], q1, r_ball)

    sd = _set_distance(seam_points(six), seam_points(shifted))
    rep.add(Check("D: Sigma_6 and tau(Sigma_6) agree on the seams near q_1^+", "seam agreement",
                  sd <= 5 * h * h, sd, 5 * h * h, {"radius": r_ball}))

    allv = _near(np.vstack([m.vertices for m in six]), q1, r_ball)
    worst_r = 0.0
    for i, j in rr:
        rot = compose(rho_face(n, i), rho_face(n, j))
        img = _near(np.vstack([rot.apply_float(m.vertices) for m in six]), q1, r_ball)
        worst_r = max(worst_r, _set_distance(allv, img))
    rep.add(Check("D: rho_i o rho_j maps Sigma_6 to itself near q_1^+", "Sigma_6 = Sigma_7 near q_1^+",
                  worst_r <= 5 * h * h, worst_r, 5 * h * h, {"pairs": len(rr)}))

    near6 = [k for k, m in enumerate(six) if np.any(np.linalg.norm(m.vertices - q1, axis=1) < r_ball)]
    near7 = [m for m in shifted if np.any(np.linalg.norm(m.vertices - q1, axis=1) < r_ball)]
    dih = [seam_dihedral(six[k], lab, near7, lab, 5 * h)
           for k in near6 for lab in six[k].tags if _seam_on_face(six[k], lab)]
    if dih:
        w = max(c.measured for c in dih)
        rep.add(Check("D: tangent-continuous gluing of Sigma_6 and tau(Sigma_6) near q_1^+",
                      "tangent-continuous gluing", all(c.holds for c in dih), w, 5 * h,
                      {"seams": len(dih)}))

    # flat (n-2)-planes through the face centres q_i^+-
    worst_f, missing = 0.0, []
    for i in range(1, n + 1):
        for sgn in (1, -1):
            hit = set()
            for k, (_, M) in enumerate(surface.patches):
                s = L[k]
                m = surface.mesh(k)
                for lab, f in m.tags.items():
                    a, j, val = _boundary_label_plane(lab, s)
                    if a != i or val != sgn:
                        continue
                    P = m.vertices[np.unique(f)]
                    worst_f = max(worst_f, float(np.abs(P[:, i - 1] - sgn).max()),
                                  float(np.abs(P[:, j - 1]).max()))
                    hit.add(j)
            if len(hit) != n - 1:
                missing.append((i, sgn, sorted(hit)))
    rep.add(Check("D: n-1 flat (n-2)-planes through every q_i^+-", "planes at odd points",
                  worst_f <= 1e-12 and not missing, worst_f, 1e-12, {"missing": missing}))

    rep.add(Check("D: lattice translations permute patches", "period 2",
                  surface.lattice_permutes_patches(), None, None, {"patches": len(surface.patches)}))

    meshes = _window_copies(surface, 1.0 + 2 * h)
    rep.add(verify_embedded_sample(meshes, samples=samples, seed=seed,
                                   lo=-np.ones(n) * (1 + 2 * h), hi=np.ones(n) * (1 + 2 * h),
                                   claim="D: embedded in one period cell (sampled)"))
    return rep


def _seam_on_face(m: PatchMesh, label: str) -> bool:
    """Whether the tagged facets lie in {x_1 = 1} (the face around q_1^+)."""
    P = m.vertices[np.unique(m.tags[label])]
    return bool(np.all(np.abs(P[:, 0] - 1.0) < 1e-12))


def _window_copies(surface: PeriodicSurface, half: float) -> list[PatchMesh]:
    """Copies of Sigma_6 and its 2-translates meeting the box [-half, half]^n."""
    n = surface.params["n"]
    out = []
    for shift in itertools.product((-2, 0, 2), repeat=n):
        t = translate(tuple(Fraction(x) for x in shift))
        for name, M in surface.patches:
            m = surface.base[name].transformed(compose(t, M))
            if np.all(m.vertices.max(0) >= -half) and np.all(m.vertices.min(0) <= half):
                out.append(m)
    return out
