"""Simplicial patch meshes: graph meshing, rigid copies, IO and hyperplane slicing."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.spatial import Delaunay

from ..msesolver import GridFunction


class MeshError(ValueError):
    pass


class SliceError(MeshError):
    pass


def _simplex_volumes(pts: np.ndarray, simplices: np.ndarray) -> np.ndarray:
    """k-volume of each simplex (any ambient dimension) via the Gram determinant."""
    base = pts[simplices[:, 0]]
    edges = pts[simplices[:, 1:]] - base[:, None, :]
    gram = np.einsum("cik,cjk->cij", edges, edges)
    k = edges.shape[1]
    det = np.linalg.det(gram)
    return np.sqrt(np.maximum(det, 0.0)) / math.factorial(k)


@dataclass(eq=False)
class PatchMesh:
    """(n-1)-simplices in R^n with tagged boundary facets.

    ``tags`` maps a boundary label to an array of facets (vertex index
    tuples); ``owner[label]`` holds the cell carrying each facet.
    """

    n: int
    vertices: np.ndarray
    cells: np.ndarray
    tags: dict = field(default_factory=dict)
    owner: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)

    @property
    def ncells(self) -> int:
        return len(self.cells)

    def cell_volumes(self) -> np.ndarray:
        return _simplex_volumes(self.vertices, self.cells)

    def boundary_facets(self) -> tuple[np.ndarray, np.ndarray]:
        """Facets used by exactly one cell, with their owning cell."""
        d = self.cells.shape[1]
        facets, owners = [], []
        for drop in range(d):
            keep = [c for c in range(d) if c != drop]
            facets.append(self.cells[:, keep])
            owners.append(np.arange(self.ncells))
        f = np.sort(np.concatenate(facets), axis=1)
        o = np.concatenate(owners)
        uniq, inv, cnt = np.unique(f, axis=0, return_inverse=True, return_counts=True)
        inv = inv.ravel()
        single = cnt[inv] == 1
        return f[single], o[single]

    def conormals(self, facets: np.ndarray, owners: np.ndarray) -> np.ndarray:
        """Unit outward conormal of each facet inside its owning cell."""
        P = self.vertices
        out = np.empty((len(facets), self.n))
        for r, (fc, c) in enumerate(zip(facets, owners)):
            apex = next(v for v in self.cells[c] if v not in fc)
            F = P[fc]
            E = (F[1:] - F[0]).T
            w = P[apex] - F[0]
            if E.shape[1]:
                coef, *_ = np.linalg.lstsq(E, w, rcond=None)
                w = w - E @ coef
            out[r] = -w / np.linalg.norm(w)
        return out

    def cell_normals(self) -> np.ndarray:
        """Unit normals of (n-1)-cells in R^n (sign arbitrary)."""
        P = self.vertices
        out = np.empty((self.ncells, self.n))
        for r, c in enumerate(self.cells):
            E = (P[c[1:]] - P[c[0]])
            _, _, vt = np.linalg.svd(E)
            out[r] = vt[-1]
        return out

    def transformed(self, motion) -> "PatchMesh":
        """Image under an Isometry or FloatMotion; tags and cells are kept."""
        return PatchMesh(self.n, motion.apply_float(self.vertices), self.cells, self.tags,
                         self.owner, dict(self.info))

    def tagged_points(self, label: str) -> np.ndarray:
        f = self.tags.get(label)
        if f is None or len(f) == 0:
            return np.zeros((0, self.n))
        return self.vertices[np.unique(f)]


_SHEAR = np.eye(8) + 0.15 * np.random.default_rng(20240611).uniform(-1.0, 1.0, (8, 8))


def orthonormal_frame(normal: np.ndarray) -> np.ndarray:
    """Rows form an orthonormal basis of the orthogonal complement of ``normal``."""
    nu = np.asarray(normal, dtype=float)
    nu = nu / np.linalg.norm(nu)
    q, _ = np.linalg.qr(np.column_stack([nu, np.eye(len(nu))]))
    return q[:, 1:len(nu)].T


def mesh_graph(gf: GridFunction, clip: Sequence[tuple] = (), extra: Sequence[tuple] = (),
               labels: dict | None = None, clip_label: str = "clip") -> PatchMesh:
    """Delaunay triangulation of the grid nodes, lifted to the graph.

    ``clip`` is a list of float halfspaces ``(a, b)`` (``a . y <= b``) whose
    bounding planes carry lattice nodes; ``extra`` adds ``(point, value)``
    vertices (e.g. corners of the clipped domain).  Boundary facets are
    tagged by the domain facet they lie on (``labels[fid]``, default
    ``"facet<fid>"``) or by ``clip_label``.
    """
    grid = gf.grid
    pos, val = gf.all_positions(), gf.all_values()
    keep = np.ones(len(pos), dtype=bool)
    for a, b in clip:
        keep &= pos @ np.asarray(a, dtype=float) <= b + 1e-12
    pos, val = pos[keep], val[keep]
    if len(extra):
        pos = np.vstack([pos, np.array([p for p, _ in extra], dtype=float)])
        val = np.concatenate([val, np.array([v for _, v in extra], dtype=float)])
    frame = orthonormal_frame(grid.unit_normal)
    flat = pos @ frame.T
    # drop duplicates introduced by ``extra``
    _, first = np.unique(np.round(flat, 12), axis=0, return_index=True)
    first.sort()
    pos, val, flat = pos[first], val[first], flat[first]
    # A fixed generic shear breaks the cospherical lattice configurations;
    # affine images of a triangulation are triangulations.
    tri = Delaunay(flat @ _SHEAR[: flat.shape[1], : flat.shape[1]].T)
    if len(tri.coplanar):
        raise MeshError(f"{len(tri.coplanar)} points were dropped by the triangulation")
    cells = tri.simplices
    h = float(grid.h)
    # square determinant: the Gram form's square root inflates round-off on flat cells
    edges = flat[cells[:, 1:]] - flat[cells[:, :1]]
    vols = np.abs(np.linalg.det(edges)) / math.factorial(flat.shape[1])
    cells = cells[vols > 1e-9 * h ** (grid.n - 1)]
    lifted = pos + np.outer(val, grid.unit_normal)
    mesh = PatchMesh(grid.n, lifted, cells)
    mesh.info["flat_dropped"] = int(np.sum(vols <= 1e-9 * h ** (grid.n - 1)))

    facets, owners = mesh.boundary_facets()
    A = np.array([[float(x) for x in a] for a, _, _ in grid.facets])
    B = np.array([float(b) for _, b, _ in grid.facets])
    labels = labels or {}
    lab_of = []
    for fc in facets:
        P = pos[fc]
        on = np.all(np.abs(P @ A.T - B) < 1e-10, axis=0)
        lab = None
        if on.any():
            lab = labels.get(int(np.argmax(on)), f"facet{int(np.argmax(on))}")
        else:
            for a, b in clip:
                if np.all(np.abs(P @ np.asarray(a, dtype=float) - b) < 1e-10):
                    lab = clip_label
                    break
        lab_of.append(lab)
    mesh.info["untagged_boundary"] = sum(1 for x in lab_of if x is None)
    for lab in sorted({x for x in lab_of if x is not None}):
        sel = np.array([x == lab for x in lab_of])
        mesh.tags[lab] = facets[sel]
        mesh.owner[lab] = owners[sel]
    return mesh


# -- IO -----------------------------------------------------------------------------


def write_ndoff(path, mesh: PatchMesh) -> None:
    """Plain-text "ND-OFF": header, dimension line, vertex lines, cell lines."""
    with open(path, "w") as fh:
        fh.write("NDOFF\n")
        fh.write(f"{mesh.n} {len(mesh.vertices)} {mesh.ncells} {mesh.cells.shape[1]}\n")
        for v in mesh.vertices:
            fh.write(" ".join(repr(float(x)) for x in v) + "\n")
        for c in mesh.cells:
            fh.write(f"{len(c)} " + " ".join(str(int(i)) for i in c) + "\n")


def read_ndoff(path) -> PatchMesh:
    with open(path) as fh:
        lines = [ln for ln in (s.strip() for s in fh) if ln and not ln.startswith("#")]
    if lines[0] != "NDOFF":
        raise MeshError("not an ND-OFF file")
    n, nv, nc, _ = map(int, lines[1].split())
    verts = np.array([[float(x) for x in ln.split()] for ln in lines[2:2 + nv]])
    cells = np.array([[int(x) for x in ln.split()[1:]] for ln in lines[2 + nv:2 + nv + nc]], dtype=np.int64)
    return PatchMesh(n, verts.reshape(nv, n), cells.reshape(nc, -1))


def write_off(path, vertices: np.ndarray, faces: np.ndarray) -> None:
    with open(path, "w") as fh:
        fh.write("OFF\n")
        fh.write(f"{len(vertices)} {len(faces)} 0\n")
        for v in vertices:
            fh.write(" ".join(repr(float(x)) for x in v) + "\n")
        for f in faces:
            fh.write(f"{len(f)} " + " ".join(str(int(i)) for i in f) + "\n")


def write_obj(path, vertices: np.ndarray, faces: np.ndarray) -> None:
    with open(path, "w") as fh:
        for v in vertices:
            fh.write("v " + " ".join(repr(float(x)) for x in v) + "\n")
        for f in faces:
            fh.write("f " + " ".join(str(int(i) + 1) for i in f) + "\n")


def merge_meshes(meshes: Sequence[PatchMesh]) -> PatchMesh:
    off, verts, cells = 0, [], []
    for m in meshes:
        verts.append(m.vertices)
        cells.append(m.cells + off)
        off += len(m.vertices)
    return PatchMesh(meshes[0].n, np.vstack(verts), np.vstack(cells))


# -- slicing ------------------------------------------------------------------------


def slice_mesh(mesh: PatchMesh, normal: Sequence[float], offset: float) -> tuple[np.ndarray, np.ndarray]:
    """Cross-section of a tetrahedral mesh in R^4 by ``normal . x = offset``.

    Returns vertices in an orthonormal frame of the hyperplane (3D) and
    triangles.  Vertices exactly on the plane count as the positive side.
    """
    if mesh.n != 4 or mesh.cells.shape[1] != 4:
        raise MeshError("slicing expects tetrahedra in R^4")
    nu = np.asarray(normal, dtype=float)
    scale = np.linalg.norm(nu)
    nu, off = nu / scale, offset / scale
    dist = mesh.vertices @ nu - off
    pos = dist >= 0
    npos = pos[mesh.cells].sum(1)
    live = np.nonzero((npos > 0) & (npos < 4))[0]
    if len(live) == 0:
        raise SliceError("hyperplane does not meet the mesh")
    frame = orthonormal_frame(nu)
    base = off * nu
    points: dict = {}
    plist: list = []

    def cut(a: int, b: int) -> int:
        key = (min(a, b), max(a, b))
        j = points.get(key)
        if j is None:
            da, db = dist[a], dist[b]
            t = da / (da - db)
            x = mesh.vertices[a] + t * (mesh.vertices[b] - mesh.vertices[a])
            j = len(plist)
            points[key] = j
            plist.append((x - base) @ frame.T)
        return j

    tris = []
    for c in live:
        cell = mesh.cells[c]
        P = [v for v in cell if pos[v]]
        N = [v for v in cell if not pos[v]]
        if len(P) == 1 or len(N) == 1:
            lone, rest = (P[0], N) if len(P) == 1 else (N[0], P)
            tris.append([cut(lone, r) for r in rest])
        else:
            a, b = P
            c1, d = N
            q = [cut(a, c1), cut(a, d), cut(b, d), cut(b, c1)]
            tris += [[q[0], q[1], q[2]], [q[0], q[2], q[3]]]
    return np.array(plist), np.array(tris, dtype=np.int64)
