"""Periodic surfaces assembled from patch copies and the geometric check battery."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import ndimage
from scipy.optimize import linprog
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .mesh import MeshError, PatchMesh


@dataclass
class Check:
    claim: str
    anchor: str
    holds: bool
    measured: float | None = None
    tolerance: float | None = None
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"claim": self.claim, "anchor": self.anchor, "holds": bool(self.holds),
               "measured": _jsonable(self.measured), "tolerance": _jsonable(self.tolerance)}
        if self.details:
            out["details"] = {k: _jsonable(v) for k, v in self.details.items()}
        return out


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    return v


@dataclass
class VerificationReport:
    checks: list = field(default_factory=list)

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    def get(self, claim: str) -> Check:
        return next(c for c in self.checks if c.claim == claim)

    @property
    def all_hold(self) -> bool:
        return all(c.holds for c in self.checks)

    def to_list(self) -> list:
        return [c.to_dict() for c in self.checks]


@dataclass(eq=False)
class PeriodicSurface:
    """Fundamental meshes plus the rigid motions placing their copies.

    ``patches`` holds ``(base name, motion)`` pairs covering one period cell;
    ``lattice`` lists period vectors.
    """

    kind: str
    params: dict
    base: dict
    patches: list
    lattice: list
    extras: dict = field(default_factory=dict)

    def mesh(self, i: int) -> PatchMesh:
        name, motion = self.patches[i]
        return self.base[name].transformed(motion)

    def meshes(self, indices: Sequence[int] | None = None) -> list[PatchMesh]:
        idx = range(len(self.patches)) if indices is None else indices
        return [self.mesh(i) for i in idx]

    def patches_meeting(self, lo: np.ndarray, hi: np.ndarray) -> list[int]:
        """Indices of patches whose bounding box meets the box [lo, hi]."""
        out = []
        for i, (name, motion) in enumerate(self.patches):
            v = motion.apply_float(self.base[name].vertices)
            if np.all(v.max(0) >= lo - 1e-12) and np.all(v.min(0) <= hi + 1e-12):
                out.append(i)
        return out

    def lattice_permutes_patches(self, decimals: int = 9) -> bool:
        """Translating by a period vector permutes the patches modulo the lattice."""
        periods = np.array([np.asarray(t, dtype=float) for t in self.lattice])
        L = np.diag(periods) if periods.ndim == 1 else periods

        def reduce(name, M, t):
            coef = np.linalg.lstsq(L.T, t, rcond=None)[0]
            frac = coef - np.floor(coef + 1e-9)
            tt = t - L.T @ (coef - frac)
            return (name, tuple(np.round(M, decimals).ravel()), tuple(np.round(tt, decimals)))

        base = set()
        for name, m in self.patches:
            base.add(reduce(name, m.float_matrix(), m.float_translation()))
        for vec in L:
            moved = {reduce(name, m.float_matrix(), m.float_translation() + vec)
                     for name, m in self.patches}
            if moved != base:
                return False
        return len(base) == len(self.patches)


# -- boundary geometry ---------------------------------------------------------------


def _localize(cen: np.ndarray, meas: np.ndarray, singular, radius: float | None) -> dict:
    """Where the worst value sits, and the worst value away from ``singular`` points."""
    out = {"worst_at": cen[int(np.argmax(meas))]}
    if singular is not None and radius is not None and len(singular):
        S = np.asarray(singular, dtype=float)
        d = np.min(np.linalg.norm(cen[:, None, :] - S[None], axis=2), axis=1)
        far = d > radius
        out["exclusion_radius"] = radius
        out["max_away_from_singular"] = float(meas[far].max()) if far.any() else None
    return out


def verify_orthogonal_meet(m: PatchMesh, plane: tuple, tol: float, label: str | None = None,
                           claim: str = "meets plane orthogonally", singular=None,
                           radius: float | None = None) -> Check:
    """``max sqrt(1 - (eta . n)^2)`` over boundary facets in the plane.

    ``eta`` is the outward conormal, so the measure vanishes when the mesh
    leaves the plane at a right angle.  The verdict uses every facet;
    ``singular``/``radius`` only add a diagnostic maximum over facets farther
    than ``radius`` from the given points.
    """
    normal, offset = plane
    nu = np.asarray(normal, dtype=float)
    nu = nu / np.linalg.norm(nu)
    off = float(offset) / np.linalg.norm(np.asarray(normal, dtype=float))
    if label is not None and label in m.tags:
        facets, owners = m.tags[label], m.owner[label]
    else:
        facets, owners = m.boundary_facets()
        on = np.all(np.abs(m.vertices[facets] @ nu - off) < 1e-9, axis=1)
        facets, owners = facets[on], owners[on]
    if len(facets) == 0:
        raise MeshError("no boundary facets on the plane")
    eta = m.conormals(facets, owners)
    meas = np.sqrt(np.clip(1.0 - (eta @ nu) ** 2, 0.0, None))
    worst = float(meas.max())
    det = {"facets": len(facets), "mean": float(meas.mean())}
    det.update(_localize(m.vertices[facets].mean(1), meas, singular, radius))
    return Check(claim, "orthogonal meet", worst <= tol, worst, tol, det)


def _facet_frames(m: PatchMesh, label: str):
    facets, owners = m.tags.get(label, np.zeros((0, m.n - 1), int)), m.owner.get(label, np.zeros(0, int))
    pts = m.vertices[facets] if len(facets) else np.zeros((0, m.n - 1, m.n))
    return pts, (m.conormals(facets, owners) if len(facets) else np.zeros((0, m.n)))


def seam_dihedral(a: PatchMesh, label_a: str, others: Sequence[PatchMesh], label_b: str,
                  tol: float, claim: str = "seam dihedral", singular=None,
                  radius: float | None = None) -> Check:
    """Dihedral angle across boundary facets of ``a`` glued to facets of ``others``.

    For each tagged facet of ``a`` the facet of another patch containing its
    centroid is located; the deviation ``pi - angle(eta_a, eta_b)`` is 0 for a
    tangent-continuous continuation.
    """
    pa, ea = _facet_frames(a, label_a)
    if len(pa) == 0:
        raise MeshError("no seam facets")
    pb, eb = [], []
    for o in others:
        p, e = _facet_frames(o, label_b)
        pb.append(p)
        eb.append(e)
    pb, eb = np.concatenate(pb), np.concatenate(eb)
    ca, cb = pa.mean(1), pb.mean(1)
    tree = cKDTree(cb)
    devs, where, unmatched = [], [], 0
    kq = min(16, len(cb))
    for c, e, tri in zip(ca, ea, pa):
        _, idx = tree.query(c, k=kq)
        found = None
        for j in np.atleast_1d(idx):
            F = pb[j]
            E = (F[1:] - F[0]).T
            coef, *_ = np.linalg.lstsq(E, c - F[0], rcond=None)
            resid = np.linalg.norm(E @ coef - (c - F[0]))
            bary = np.concatenate([[1 - coef.sum()], coef])
            if resid < 1e-9 and bary.min() > -1e-9:
                found = j
                break
        if found is None:
            unmatched += 1
            continue
        ang = math.acos(float(np.clip(e @ eb[found], -1.0, 1.0)))
        devs.append(math.pi - ang)
        where.append(c)
    worst = float(max(devs)) if devs else math.inf
    det = {"facets": len(pa), "matched": len(devs), "unmatched": unmatched,
           "mean": float(np.mean(devs)) if devs else None}
    if devs:
        det.update(_localize(np.array(where), np.array(devs), singular, radius))
    return Check(claim, "tangent-continuous gluing", bool(devs) and worst <= tol and unmatched == 0,
                 worst, tol, det)


# -- embeddedness ----------------------------------------------------------------------


def simplex_overlap_depth(P: np.ndarray, Q: np.ndarray) -> float:
    """Largest ``s`` with a common point having all barycentric weights >= s in both.

    Returns -1 when the closed simplices are disjoint.  Positive depth means
    the relative interiors meet.
    """
    p, q = len(P), len(Q)
    n = P.shape[1]
    nv = p + q + 1
    c = np.zeros(nv)
    c[-1] = -1.0
    A_eq = np.zeros((n + 2, nv))
    A_eq[:n, :p] = P.T
    A_eq[:n, p:p + q] = -Q.T
    A_eq[n, :p] = 1.0
    A_eq[n + 1, p:p + q] = 1.0
    b_eq = np.zeros(n + 2)
    b_eq[n:] = 1.0
    A_ub = np.zeros((p + q, nv))
    A_ub[:, :p + q] = -np.eye(p + q)
    A_ub[:, -1] = 1.0
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(p + q), A_eq=A_eq, b_eq=b_eq,
                  bounds=[(0, 1)] * (p + q) + [(0, 1)], method="highs")
    if res.status == 2:
        return -1.0
    if not res.success:
        raise MeshError(f"overlap LP failed: {res.message}")
    return float(res.x[-1])


def candidate_pairs(meshes: Sequence[PatchMesh], lo=None, hi=None) -> np.ndarray:
    """Cell pairs ``(patch, cell, patch, cell)`` from distinct patches whose bounding spheres overlap."""
    data = []
    for m in meshes:
        pts = m.vertices[m.cells]
        cen = pts.mean(1)
        rad = np.linalg.norm(pts - cen[:, None, :], axis=2).max(1)
        sel = np.ones(len(cen), dtype=bool)
        if lo is not None:
            sel &= np.all(cen >= lo, axis=1) & np.all(cen <= hi, axis=1)
        ids = np.nonzero(sel)[0]
        data.append((ids, cen[ids], rad[ids], cKDTree(cen[ids]) if len(ids) else None))
    out = []
    for i in range(len(meshes)):
        for j in range(i + 1, len(meshes)):
            ia, ca, ra, ta = data[i]
            ib, cb, rb, tb = data[j]
            if ta is None or tb is None:
                continue
            r = float(ra.max() + rb.max())
            sd = ta.sparse_distance_matrix(tb, r, output_type="ndarray")
            if len(sd) == 0:
                continue
            a, b, d = sd["i"], sd["j"], sd["v"]
            ok = d <= ra[a] + rb[b]
            m = int(ok.sum())
            out.append(np.column_stack([np.full(m, i), ia[a[ok]], np.full(m, j), ib[b[ok]]]))
    return np.vstack(out).astype(np.int64) if out else np.zeros((0, 4), dtype=np.int64)


def verify_embedded_sample(s, samples: int = 2000, seed: int = 0, lo=None, hi=None,
                           depth_tol: float = 1e-6, claim: str = "embedded (sampled)") -> Check:
    """Sampled pairwise intersection test between cells of distinct patches.

    ``s`` is a :class:`PeriodicSurface` or a list of meshes.  Cell pairs
    with overlapping bounding spheres are candidates; up to ``samples`` of
    them (seeded) are tested exactly by linear programming.
    """
    meshes = s.meshes() if isinstance(s, PeriodicSurface) else list(s)
    lo_a = None if lo is None else np.asarray(lo, dtype=float)
    hi_a = None if hi is None else np.asarray(hi, dtype=float)
    pairs = candidate_pairs(meshes, lo_a, hi_a)
    rng = np.random.default_rng(seed)
    if len(pairs) > samples:
        pick = rng.choice(len(pairs), size=samples, replace=False)
        pairs_t = pairs[np.sort(pick)]
    else:
        pairs_t = pairs
    hit, worst = None, -1.0
    for i, a, j, b in pairs_t.tolist():
        P = meshes[i].vertices[meshes[i].cells[a]]
        Q = meshes[j].vertices[meshes[j].cells[b]]
        d = simplex_overlap_depth(P, Q)
        worst = max(worst, d)
        if d > depth_tol:
            hit = {"patch_a": i, "cell_a": a, "patch_b": j, "cell_b": b, "depth": d,
                   "cell_a_vertices": P.tolist(), "cell_b_vertices": Q.tolist()}
            break
    det = {"candidates": len(pairs), "tested": len(pairs_t), "max_depth": worst}
    if hit:
        det["intersection"] = hit
    return Check(claim, "embeddedness", hit is None, worst, depth_tol, det)


def spine_distance(points: np.ndarray, planes: Sequence[np.ndarray]) -> np.ndarray:
    """Distance of points to the nearest of several linear subspaces (row bases)."""
    best = np.full(len(points), np.inf)
    for B in planes:
        q, _ = np.linalg.qr(np.asarray(B, dtype=float).T)
        resid = points - (points @ q) @ q.T
        best = np.minimum(best, np.linalg.norm(resid, axis=1))
    return best


def complement_components(meshes: Sequence[PatchMesh], lo: np.ndarray, period: float,
                          delta: float) -> dict:
    """Connected components of the voxelized complement in a cubic period cell.

    Voxels of side ``delta`` whose centre may lie within ``delta / 2`` of the
    surface are blocked; the surface is sampled on a barycentric lattice of
    spacing ``s = delta / 4`` and the threshold is ``delta / 2 + s``, so two
    face-adjacent free voxels never straddle a cell.  Opposite faces of the
    cell are glued.  A heuristic: thin channels may be closed off.
    """
    n = meshes[0].n
    N = int(round(period / delta))
    s = delta / 4
    r = delta / 2 + s
    edge = max(float(np.linalg.norm(m.vertices[m.cells[:, 1:]] - m.vertices[m.cells[:, :1]], axis=2).max())
               for m in meshes)
    lev = max(1, math.ceil(edge / s))
    k = meshes[0].cells.shape[1]
    bary = np.array([c for c in itertools.product(range(lev + 1), repeat=k) if sum(c) == lev], float) / lev
    # offsets with three or more nonzero entries are farther than r from any point of the voxel
    offs = np.array([o for o in itertools.product((-1, 0, 1), repeat=n) if np.count_nonzero(o) <= 2])
    blocked = np.zeros(N ** n, dtype=bool)
    lo = np.asarray(lo, dtype=float)
    for m in meshes:
        V = m.vertices[m.cells]
        for c0 in range(0, len(V), 512):
            P = np.einsum("bk,ckd->cbd", bary, V[c0:c0 + 512]).reshape(-1, n)
            P = np.mod(P - lo, period)
            base = np.floor(P / delta).astype(np.int64)
            for o in offs:
                idx = base + o
                ok = np.linalg.norm(P - (idx + 0.5) * delta, axis=1) <= r
                blocked[np.ravel_multi_index(tuple(np.mod(idx[ok], N).T), (N,) * n)] = True
    free = ~blocked.reshape((N,) * n)
    lab, nlab = ndimage.label(free)
    a, b = [], []
    for ax in range(n):
        x, y = np.take(lab, 0, axis=ax).ravel(), np.take(lab, N - 1, axis=ax).ravel()
        sel = (x > 0) & (y > 0)
        a.append(x[sel])
        b.append(y[sel])
    a, b = np.concatenate(a), np.concatenate(b)
    graph = coo_matrix((np.ones(len(a)), (a, b)), shape=(nlab + 1, nlab + 1))
    ncomp, root = connected_components(graph, directed=False)
    sizes = np.bincount(root[lab[free]])
    sizes = np.sort(sizes[sizes > 0])[::-1]
    return {"components": int(len(sizes)), "voxels": sizes.tolist(), "free_fraction": float(free.mean()),
            "delta": delta}
