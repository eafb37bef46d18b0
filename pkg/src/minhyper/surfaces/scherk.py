"""Scherk type towers in R^n: pie-shaped copies of the exhausted graph.

``Sigma_8`` is the graph of the exhaustion limit over the infinite box
``R x [0, a_2] x ... x [0, a_{n-1}]``; it lies in the wedge ``V`` of angle
pi/k above ``x_n = c_k |x_1|``.  Half-turns about its boundary pieces tile
the (x_1, x_n)-plane by 2k sectors in alternating fashion: in a box slab of
even parity the copies occupy the even sectors, in odd slabs the odd ones.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np

from .. import exact as ex
from ..isometry import FloatMotion
from ..msesolver import Exhaustion, exhaust_limit, scherk2_distance
from .mesh import PatchMesh, mesh_graph
from .verify import Check, PeriodicSurface, VerificationReport, verify_embedded_sample


class ScherkError(ValueError):
    pass


def _facet_labels(gf) -> dict:
    labels = {}
    n = gf.grid.n
    for fid, (a, b, _) in enumerate(gf.grid.facets):
        j = next(i for i, x in enumerate(a) if x != 0)
        if j == 0:
            labels[fid] = "x1=+b" if a[0] > 0 else "x1=-b"
        else:
            labels[fid] = f"x{j + 1}=0" if a[j] < 0 else f"x{j + 1}=a"
    return labels


def build_sigma8(ex_result: Exhaustion, window: float) -> PatchMesh:
    """The exhausted graph lifted to R^n and clipped to ``|x_1| <= window``."""
    gf = ex_result.gf
    n = gf.grid.n
    e1 = np.zeros(n)
    e1[0] = 1.0
    mesh = mesh_graph(gf, clip=[(e1, window), (-e1, window)], labels=_facet_labels(gf),
                      clip_label="window")
    mesh.info["gf"] = gf
    return mesh


def _plane_block(n: int, m2: np.ndarray) -> np.ndarray:
    M = np.eye(n)
    M[np.ix_([0, n - 1], [0, n - 1])] = m2
    return M


def rot2(alpha: float) -> np.ndarray:
    c, s = math.cos(alpha), math.sin(alpha)
    return np.array([[c, -s], [s, c]])


def refl2(beta: float) -> np.ndarray:
    """Reflection of the (x_1, x_n)-plane across the line at angle ``beta``."""
    c, s = math.cos(2 * beta), math.sin(2 * beta)
    return np.array([[c, s], [s, -c]])


def sector_line_angles(k: int) -> list[float]:
    """Angles in [0, pi) of the lines l_1, ..., l_k bounding the 2k sectors."""
    return sorted((math.pi / 2 + math.pi / (2 * k) + j * math.pi / k) % math.pi for j in range(k))


def pie_motion(n: int, k: int, sides, slab: tuple, sector: int) -> FloatMotion:
    """Motion taking Sigma_8 (sector 0, slab 0) to ``sector`` of box slab ``slab``.

    Sectors are numbered by their bisector angle pi/2 + j pi/k; the sector
    parity must equal the slab parity.
    """
    p = sum(slab) % 2
    if sector % 2 != p:
        raise ScherkError("sector parity must match slab parity")
    if p == 0:
        m2 = rot2(sector * math.pi / k)
    else:
        m2 = rot2((sector - 1) * math.pi / k) @ refl2(math.pi / 2 + math.pi / (2 * k))
    M = _plane_block(n, m2)
    t = np.zeros(n)
    for j, (mj, a) in enumerate(zip(slab, sides)):
        a = float(a)
        if mj % 2 == 0:
            t[j + 1] = mj * a
        else:
            M[j + 1, j + 1] = -1.0
            t[j + 1] = (mj + 1) * a
    return FloatMotion(M, t)


def build_scherk(n: int, k: int, sides, h, window: float | None = None, tol: float = 1e-8,
                 solve_tol: float = 1e-10, b_max: int = 64) -> PeriodicSurface:
    """Sigma_S from the exhaustion limit; patches cover one period cell.

    The period cell is two box slabs per direction (period 2 a_i) times all
    chosen sectors.
    """
    if k < 2:
        raise ScherkError("k must be >= 2")
    sides = list(sides)
    if len(sides) != n - 2:
        raise ScherkError(f"need n - 2 = {n - 2} side lengths")
    exr = exhaust_limit(k, sides, h, tol=tol, solve_tol=solve_tol, b_max=b_max)
    b = exr.bs[-1]
    window = window if window is not None else b / 2
    if window > b:
        raise ScherkError(f"window {window} exceeds the final box half-length {b}")
    sigma8 = build_sigma8(exr, window)
    patches = []
    for slab in itertools.product((0, 1), repeat=n - 2):
        p = sum(slab) % 2
        for sector in range(p, 2 * k, 2):
            patches.append(("sigma8", pie_motion(n, k, exr.sides, slab, sector)))
    lattice = [ex.scale(2 * Fraction(a), ex.unit(n, j + 2)) for j, a in enumerate(exr.sides)]
    return PeriodicSurface("S", {"n": n, "k": k, "sides": [str(a) for a in exr.sides], "h": str(h),
                                 "tol": tol, "window": window},
                           {"sigma8": sigma8}, patches, lattice, {"exhaustion": exr})


def window_copies(surface: PeriodicSurface, slabs=(-1, 0, 1)) -> list[PatchMesh]:
    n, k = surface.params["n"], surface.params["k"]
    sides = surface.extras["exhaustion"].sides
    out = []
    for slab in itertools.product(slabs, repeat=n - 2):
        p = sum(slab) % 2
        for sector in range(p, 2 * k, 2):
            out.append(surface.base["sigma8"].transformed(pie_motion(n, k, sides, slab, sector)))
    return out


def decay_profile(exr: Exhaustion, window: float) -> tuple[np.ndarray, np.ndarray]:
    """Max distance from Sigma_8 to the nearer plane x_n = c_k |x_1|, per grid column."""
    pos, val = exr.gf.all_positions(), exr.gf.all_values()
    c = exr.c
    d = np.abs(val - c * np.abs(pos[:, 0])) / math.sqrt(1 + c * c)
    x = np.round(np.abs(pos[:, 0]), 12)
    cols = np.unique(x[x <= window + 1e-12])
    return cols, np.array([d[x == t].max() for t in cols])


def verify_scherk(surface: PeriodicSurface, samples: int = 2000, seed: int = 0) -> VerificationReport:
    rep = VerificationReport()
    exr: Exhaustion = surface.extras["exhaustion"]
    sigma8: PatchMesh = surface.base["sigma8"]
    n, k = surface.params["n"], surface.params["k"]
    window = surface.params["window"]
    h = float(exr.gf.grid.h)
    c = exr.c

    rep.add(Check("S: exhaustion monotone in b", "h_{k,b1} < h_{k,b2} for b1 < b2",
                  exr.monotone_violations == 0, exr.monotone_violations, 0,
                  {"bs": exr.bs, "min_increment": exr.min_increment, "sup_changes": exr.sup_changes}))
    rep.add(Check("S: h_{k,1} <= c_k on Q_1", "bound on the unit box", exr.h_b1_max <= c + 1e-12,
                  exr.h_b1_max, c))
    rep.add(Check("S: h_{k,b} < g + c_k on Q_1", "catenoid barrier", exr.barrier_margin > 0,
                  exr.barrier_margin, 0.0, {"waist": exr.waist}))
    rep.add(Check("S: h_{k,b} <= (a + c_k) + c_k |x_1|", "growth bound", exr.growth_margin >= 0,
                  exr.growth_margin, 0.0))

    if n == 3 and k == 2:
        width = float(exr.sides[0])
        P = sigma8.vertices[np.abs(sigma8.vertices[:, 0]) <= 1 + 1e-12]
        dist = scherk2_distance(P, width)
        med = float(np.median(dist))
        rep.add(Check("S: n=3, k=2 mesh matches sin z = sinh x sinh y", "Scherk second surface",
                      med <= 5 * h, med, 5 * h, {"max": float(dist.max()), "points": len(P)}))

    cols, dec = decay_profile(exr, window)
    steps = np.diff(dec)
    rep.add(Check("S: distance to the V-planes decays over the window", "asymptotic to k hyperplanes",
                  bool(np.all(steps <= 1e-9)), float(steps.max()) if len(steps) else None, 1e-9,
                  {"x1": cols[:: max(1, len(cols) // 16)], "distance": dec[:: max(1, len(cols) // 16)],
                   "last": float(dec[-1])}))

    # flat pieces: boundary over the box faces lies in P^{n-3} x l_i
    angles = sector_line_angles(k)
    dirs = np.array([[math.cos(t), math.sin(t)] for t in angles])
    sides = [float(a) for a in exr.sides]
    worst, hit = 0.0, set()
    for m in window_copies(surface):
        for lab, f in m.tags.items():
            if lab.startswith("x1") or lab == "window":
                continue
            j = int(lab[1:lab.index("=")]) - 1
            P = m.vertices[np.unique(f)]
            r = P[:, j] / sides[j - 1]
            worst = max(worst, float(np.abs(r - np.round(r)).max() * sides[j - 1]))
            pl = P[:, [0, n - 1]]
            off = np.abs(pl @ np.stack([-dirs[:, 1], dirs[:, 0]]))  # distance to each line
            worst = max(worst, float(off.min(1).max()))
            hit.update(int(i) for i in np.unique(off.argmin(1)))
    rep.add(Check("S: Sigma_S contains P^{n-3} x l_i", "flat pieces", worst <= 1e-12 and len(hit) == k,
                  worst, 1e-12, {"lines_hit": sorted(hit), "k": k}))

    rep.add(Check("S: lattice translations permute patches", "periodic along P^{n-2}",
                  surface.lattice_permutes_patches(), None, None, {"patches": len(surface.patches)}))

    meshes = window_copies(surface)
    rep.add(verify_embedded_sample(meshes, samples=samples, seed=seed,
                                   claim="S: embedded within one period window (sampled)"))
    return rep
