"""Schwarz P type hypersurface in R^4.

The Jenkins–Serrin graph spanning the double cone over the boundary of
B_1^+ is solved over its projection along (0,1,1,1), clipped at x_1 = 1,
and copied by the permutations and the antipodal map into the cube
[-1,1]^4; reflections across {x_i = +-1} then make it 4-periodic.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np

from .. import exact as ex
from ..isometry import (antipodal, apply, check_cone_obstruction, compose, group_G0, group_G1,
                        identity, reflect)
from ..msesolver import BoundaryData, GridFunction, discretize, solve_mse
from ..polytope import face_B, p_domain
from .mesh import PatchMesh, mesh_graph
from .verify import (Check, PeriodicSurface, VerificationReport, complement_components, seam_dihedral,
                     spine_distance,
                     verify_embedded_sample, verify_orthogonal_meet)

GRAPH_NORMAL = (0, 1, 1, 1)


class PObstructionError(ValueError):
    """Raised for n != 4, carrying the exact verdict when the obstruction applies."""

    def __init__(self, msg: str, verdict=None):
        super().__init__(msg)
        self.verdict = verdict


def _require_dim(n: int) -> None:
    if n == 4:
        return
    if n >= 5:
        v = check_cone_obstruction(n)
        if v.holds:  # pragma: no cover - the exact check decides
            raise PObstructionError(f"unexpected: cone identity holds for n = {n}", v)
        raise PObstructionError(
            f"n = {n}: the 180-degree rotation about K_12 does not carry O x dB_1^+ onto "
            f"O x dB_2^-, so the piece cannot be continued (witness {v.witness})", v)
    raise PObstructionError("the P construction is implemented for n = 4 only")


def p_height(v) -> Fraction | float:
    """Height along the unit normal of the lift of a projected vertex."""
    nu = np.array(GRAPH_NORMAL, dtype=float)
    # projected B_1^+ vertices sit 1/sqrt 3 below the original cone vertices
    return 0.0 if all(x == 0 for x in v[1:]) else -1.0 / math.sqrt(float(nu @ nu))


def solve_p_graph(h, tol: float = 1e-10, perturb: float = 0.0, n: int = 4) -> GridFunction:
    """Graph over the projected double cone with boundary Gamma_1.

    ``perturb`` adds a bump to the data on one facet (a symmetry-breaking
    negative control).
    """
    _require_dim(n)
    dom = p_domain(4)
    grid = discretize(dom, h, normal=GRAPH_NORMAL)
    data = BoundaryData.piecewise_linear(dom, p_height)
    if perturb:
        c = np.array([[float(x) for x in v] for v in grid.facets[0][2]]).mean(0)

        def bump(pos, fid):
            r = np.linalg.norm(pos - c, axis=1)
            return perturb * np.maximum(0.0, 1 - 4 * r) * (fid == 0)

        data = data.with_bump(bump)
    return solve_mse(grid, data, tol=tol)


def _facet_labels(gf: GridFunction) -> dict:
    labels = {}
    for fid, (_, _, verts) in enumerate(gf.grid.facets):
        labels[fid] = "spine" if ex.zero(4) in verts else "spine_hat"
    return labels


def build_p_fundamental(h, tol: float = 1e-10, n: int = 4, gf: GridFunction | None = None) -> PatchMesh:
    """Sigma_1: the solved graph lifted to R^4 and clipped to x_1 <= 1."""
    _require_dim(n)
    gf = gf or solve_p_graph(h, tol)
    mesh = mesh_graph(gf, clip=[(np.array([1.0, 0, 0, 0]), 1.0)], labels=_facet_labels(gf),
                      clip_label="x1=1")
    mesh.info["gf"] = gf
    mesh.info["max_abs_coord"] = float(np.abs(mesh.vertices).max())
    return mesh


def sigma4_motions() -> list:
    """One permutation (possibly composed with x -> -x) per facet B_i^+-."""
    out, seen = [], set()
    b1 = face_B(4, 1, +1)
    phi = antipodal(4)
    for g in group_G1(4).elements():
        for m in (g, compose(g, phi)):
            key = apply(m, b1).vertices
            if key not in seen:
                seen.add(key)
                out.append(m)
    return out


def assemble_p(h, tol: float = 1e-10, n: int = 4, sigma1: PatchMesh | None = None) -> PeriodicSurface:
    """Sigma_4 in [-1,1]^4 and its reflections across {x_i = 1}: one 4-period cell."""
    _require_dim(n)
    sigma1 = sigma1 or build_p_fundamental(h, tol)
    s4 = sigma4_motions()
    patches = []
    for sub in itertools.product((0, 1), repeat=4):
        r = identity(4)
        for i, on in enumerate(sub):
            if on:
                r = compose(reflect(4, i + 1, offset=1), r)
        patches += [("sigma1", compose(r, m)) for m in s4]
    lattice = [ex.scale(4, ex.unit(4, i + 1)) for i in range(4)]
    return PeriodicSurface("P", {"n": 4, "h": str(h), "tol": tol}, {"sigma1": sigma1},
                           patches, lattice, {"sigma4": len(s4)})


def p_corner_points() -> np.ndarray:
    """Vertices of the faces B_i^+- (points of Q^4 with coordinates +-1 summing to 0).

    The boundary of every copy of Sigma_1 has conical vertices there.
    """
    return np.array([v for v in itertools.product((-1.0, 1.0), repeat=4) if sum(v) == 0])


def reflected_double_dihedral(sigma1: PatchMesh, tol: float, radius: float | None = None) -> Check:
    """Seam dihedral between Sigma_1 and its mirror image across {x_1 = 1}."""
    refl = sigma1.transformed(reflect(4, 1, offset=1))
    return seam_dihedral(sigma1, "x1=1", [refl], "x1=1", tol,
                         claim="P: reflected double across {x_1 = 1} seam dihedral",
                         singular=p_corner_points(), radius=radius)


def spine_planes() -> list:
    """The three orthogonal 2-planes {x_1 + x_j = 0} inside {x_2 + ... = -x_1} (row bases)."""
    planes = []
    for j in (2, 3, 4):
        rest = [k for k in (2, 3, 4) if k != j]
        a = np.zeros(4)
        a[0], a[j - 1] = 1, -1
        b = np.zeros(4)
        b[rest[0] - 1], b[rest[1] - 1] = 1, -1
        planes.append(np.array([a, b]))
    return planes


def verify_p(surface: PeriodicSurface, samples: int = 2000, seed: int = 0) -> VerificationReport:
    rep = VerificationReport()
    sigma1: PatchMesh = surface.base["sigma1"]
    gf: GridFunction = sigma1.info["gf"]
    h = float(gf.grid.h)
    tol = surface.params.get("tol", 1e-10)

    corners = p_corner_points()
    rep.add(verify_orthogonal_meet(sigma1, (np.array([1.0, 0, 0, 0]), 1.0), 5 * h, label="x1=1",
                                   claim="P: Sigma_1 meets {x_1 = 1} orthogonally",
                                   singular=corners, radius=4 * h))

    defects = {str(g.matrix): gf.invariance_defect(g.matrix) for g in group_G0(4).elements()}
    worst = max(defects.values())
    rep.add(Check("P: solved graph invariant under G_0", "permutations fixing x_1",
                  worst <= 10 * tol, worst, 10 * tol, {"elements": len(defects)}))

    nsig4 = surface.extras["sigma4"]
    sig4 = surface.meshes(range(nsig4))
    rep.add(seam_dihedral(sig4[0], "spine", sig4[1:], "spine", 5 * h,
                          claim="P: Sigma_4 seam dihedral across spine facets",
                          singular=corners, radius=4 * h))

    pts = sigma1.tagged_points("spine")
    dist = spine_distance(pts, spine_planes())
    rep.add(Check("P: boundary inside Q^4 lies on the spine L_4", "spine containment",
                  float(dist.max()) <= 1e-12, float(dist.max()), 1e-12, {"points": len(pts)}))

    hit = set()
    for fc in sigma1.tags.get("spine", []):
        for p_i, B in enumerate(spine_planes()):
            if spine_distance(sigma1.vertices[fc], [B]).max() <= 1e-12:
                hit.add(p_i)
    rep.add(Check("P: three orthogonal planes through O lie in Sigma_P", "planes through even points",
                  len(hit) == 3, len(hit), 3))

    cube = sigma1.info["max_abs_coord"]
    rep.add(Check("P: Sigma_1 inside Q^4", "containment", cube <= 1 + 1e-9, cube, 1.0))

    rep.add(Check("P: lattice translations permute patches", "period 4",
                  surface.lattice_permutes_patches(), None, None, {"patches": len(surface.patches)}))

    lo, hi = -np.ones(4) - 0.25, np.ones(4) + 0.25
    idx = surface.patches_meeting(lo, hi)
    rep.add(verify_embedded_sample(surface.meshes(idx), samples=samples, seed=seed, lo=lo, hi=hi,
                                   claim="P: embedded near Q^4 (sampled)"))
    return rep


def verify_labyrinths(surface: PeriodicSurface, delta: float = 0.25) -> Check:
    """Two congruent complementary labyrinths, checked on a voxel grid of one period cell.

    Non-conclusive: blocking may cut channels narrower than ``delta`` and
    equal voxel counts stand in for congruence.
    """
    info = complement_components(surface.meshes(), -np.ones(4), 4.0, delta)
    v = info["voxels"]
    ok = info["components"] == 2 and v[0] == v[1]
    return Check("P: complement has two congruent labyrinths (voxel heuristic)",
                 "two labyrinths", ok, info["components"], 2, info)
