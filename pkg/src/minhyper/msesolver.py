"""Finite-difference Dirichlet solver for minimal graphs over convex polytopes.

A domain lives in a hyperplane ``{nu . y = 0}`` of R^n with an integer normal
``nu`` having some entry ``nu_k = +-1``.  The grid is the orthogonal
projection of the cubic lattice ``h Z^n`` onto that hyperplane.  The
projected unit vectors ``d_i`` satisfy ``sum_i d_i d_i^T = I`` on the
hyperplane, so

    div(a grad u) = sum_i D_i (a D_i u),   D_i = d_i . grad,

and each term is discretized along the lattice direction ``d_i`` with
Shortley–Weller fractions ``theta`` where a stencil arm leaves the domain.
The lattice is invariant under every coordinate permutation preserving
``nu``, and so is the scheme.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.optimize import linprog

from . import exact as ex
from .catenoid import barrier_profile, half_catenoid_g, waist_condition
from .polytope import NonConvexError, Polytope, PolytopeError, box

THETA_SNAP = 1e-3
EPS_CS = 1e-30


class GridError(ValueError):
    pass


class SolverError(RuntimeError):
    def __init__(self, msg: str, history: Sequence[float] = ()):
        super().__init__(msg)
        self.history = list(history)


class DivergedError(SolverError):
    pass


class ExhaustionError(RuntimeError):
    pass


# -- grid ---------------------------------------------------------------------


def _integer_normal(domain: Polytope) -> tuple[int, ...]:
    n = domain.dim_ambient
    if domain.affine_hull_dim != n - 1:
        raise GridError("domain must span a hyperplane")
    v0 = domain.vertices[0]
    basis = ex.nullspace([ex.sub(v, v0) for v in domain.vertices[1:]], n)
    if len(basis) != 1:
        raise GridError("domain must span a hyperplane")
    nu = basis[0]
    den = math.lcm(*(x.denominator for x in nu))
    ints = [int(x * den) for x in nu]
    g = math.gcd(*ints)
    ints = [x // g for x in ints]
    if ex.dot(ints, v0) != 0:
        raise GridError("domain hyperplane must pass through the origin")
    return tuple(ints)


def domain_facets(domain: Polytope) -> list[tuple]:
    """Non-redundant inequality halfspaces ``(a, b, tight vertices)``."""
    out, seen = [], set()
    for a, b in domain.halfspaces:
        t = domain.tight((a, b))
        if len(t) == len(domain.vertices):
            continue
        if ex.affine_rank(t) != domain.affine_hull_dim - 1:
            continue
        key = tuple(t)
        if key in seen:
            continue
        seen.add(key)
        out.append((a, b, key))
    return out


def inradius(domain: Polytope, normal: Sequence[int]) -> float:
    """Chebyshev radius of the domain inside its hyperplane."""
    nu = np.array(normal, dtype=float)
    nu /= np.linalg.norm(nu)
    rows, rhs = [], []
    for a, b, _ in domain_facets(domain):
        af = np.array([float(x) for x in a])
        ap = af - (af @ nu) * nu
        rows.append(np.concatenate([af, [np.linalg.norm(ap)]]))
        rhs.append(float(b))
    n = len(nu)
    c = np.zeros(n + 1)
    c[-1] = -1.0
    res = linprog(c, A_ub=np.array(rows), b_ub=np.array(rhs),
                  A_eq=np.concatenate([nu, [0.0]])[None, :], b_eq=[0.0],
                  bounds=[(None, None)] * n + [(0, None)], method="highs")
    if not res.success:
        raise GridError("could not compute inradius")
    return float(res.x[-1])


@dataclass(eq=False)
class Grid:
    """Interior lattice nodes plus boundary nodes (feet) of a polytopal domain."""

    domain: Polytope
    normal: tuple
    k: int  # 0-based coordinate with normal[k] = +-1
    h: Fraction
    scale: int  # lattice coordinates Y = scale * y are integers
    m: np.ndarray  # (N, n-1) index coordinates of interior nodes
    Y: np.ndarray  # (N, n) integer scaled positions
    dirs: np.ndarray  # (D, n) projected unit vectors d_i
    dir_axes: tuple  # ambient axis of each direction
    steps: np.ndarray  # (D, n-1) index step per direction
    nbr: np.ndarray  # (D, 2, N) interior neighbour or -1
    theta: np.ndarray  # (D, 2, N)
    foot: np.ndarray  # (D, 2, N) boundary-node index or -1
    bpos: np.ndarray  # (F, n) boundary node positions
    bkeys: list  # exact positions (tuples of Fraction)
    bfacet: np.ndarray  # (F,) facet touched by each boundary node
    facets: list = field(repr=False, default_factory=list)
    snapped: np.ndarray | None = None  # boundary ids that are snapped lattice nodes

    @property
    def n(self) -> int:
        return len(self.normal)

    @property
    def pos(self) -> np.ndarray:
        return self.Y / self.scale

    @property
    def n_interior(self) -> int:
        return len(self.m)

    @property
    def n_boundary(self) -> int:
        return len(self.bpos)

    @property
    def unit_normal(self) -> np.ndarray:
        nu = np.array(self.normal, dtype=float)
        return nu / np.linalg.norm(nu)

    def _lookup(self) -> dict:
        d = getattr(self, "_ykey", None)
        if d is None:
            d = {tuple(r): i for i, r in enumerate(self.Y.tolist())}
            self._ykey = d
        return d

    def node_index(self, y_exact: Sequence) -> int | None:
        """Interior node at an exact position, if any."""
        Y = [Fraction(c) * self.scale for c in y_exact]
        if any(c.denominator != 1 for c in Y):
            return None
        return self._lookup().get(tuple(int(c) for c in Y))

    def boundary_index(self, y_exact: Sequence) -> int | None:
        d = getattr(self, "_bkey", None)
        if d is None:
            d = {k: i for i, k in enumerate(self.bkeys)}
            self._bkey = d
        return d.get(tuple(Fraction(c) for c in y_exact))


def _as_fraction_h(h) -> Fraction:
    if isinstance(h, Fraction):
        q = h
    elif isinstance(h, int):
        q = Fraction(h)
    else:
        q = Fraction(h).limit_denominator(1 << 20)
        if abs(float(q) - float(h)) > 1e-14 * abs(float(h)):
            raise GridError("h must be rational")
    if q <= 0:
        raise GridError("h must be positive")
    return q


def discretize(domain, h, normal: Sequence[int] | None = None) -> Grid:
    """Lattice grid of spacing ``h`` on a convex polytope spanning a hyperplane.

    ``domain`` may also be a list of exact points, which must be in convex
    position.
    """
    if not isinstance(domain, Polytope):
        domain = Polytope.from_vertices(domain, strict=True)
    h = _as_fraction_h(h)
    nu = tuple(int(x) for x in normal) if normal is not None else _integer_normal(domain)
    n = len(nu)
    if any(ex.dot(nu, v) != 0 for v in domain.vertices):
        raise GridError("domain is not in the hyperplane of the given normal")
    try:
        k = next(i for i, x in enumerate(nu) if abs(x) == 1)
    except StopIteration:
        raise GridError("normal needs an entry equal to +-1") from None
    r_in = inradius(domain, nu)
    if float(h) > r_in:
        raise GridError(f"h = {float(h)} exceeds the domain inradius {r_in:.6g}")

    nn = sum(x * x for x in nu)
    p, q = h.numerator, h.denominator
    scale = q * nn
    nu_a = np.array(nu, dtype=np.int64)
    others = [j for j in range(n) if j != k]

    # direction i in scaled units: p (nn e_i - nu_i nu)
    dirs, axes, dsteps, dint = [], [], [], []
    for i in range(n):
        v = -nu[i] * nu_a
        v[i] += nn
        if not v.any():
            continue
        axes.append(i)
        dint.append(p * v)
        dirs.append(v / nn)
        if i == k:
            dsteps.append([-nu[k] * nu[j] for j in others])
        else:
            dsteps.append([1 if j == i else 0 for j in others])
    dirs = np.array(dirs, dtype=float)
    dint = np.array(dint, dtype=np.int64)
    dsteps = np.array(dsteps, dtype=np.int64)

    facets = domain_facets(domain)
    A, C = [], []
    for a, b, _ in facets:
        den = math.lcm(*(x.denominator for x in a), b.denominator)
        A.append([int(x * den) for x in a])
        C.append(b * den * scale)  # a'.Y <= C  with Y = scale y
    cden = math.lcm(*(c.denominator for c in C))
    A = np.array(A, dtype=np.int64) * cden
    C = np.array([int(c * cden) for c in C], dtype=np.int64)

    # candidate index box
    verts = domain.float_vertices()
    mcoord = np.stack([(verts[:, j] - nu[j] * nu[k] * verts[:, k]) / float(h) for j in others], 1)
    lo = np.floor(mcoord.min(0)).astype(int) - 1
    hi = np.ceil(mcoord.max(0)).astype(int) + 1
    shape = tuple(hi - lo + 1)
    mm = np.indices(shape).reshape(len(others), -1).T + lo

    def to_Y(mi: np.ndarray) -> np.ndarray:
        Y = np.zeros((len(mi), n), dtype=np.int64)
        Y[:, others] = nn * mi
        Y -= np.outer(mi @ nu_a[others], nu_a)
        return p * Y

    Ycand = to_Y(mm)
    slack = C[None, :] - Ycand @ A.T
    inside = np.all(slack > 0, axis=1)
    onbd = np.all(slack >= 0, axis=1) & ~inside
    m_int, Y_int = mm[inside], Ycand[inside]
    N = len(m_int)
    if N == 0:
        raise GridError("no interior nodes; refine h")

    # boundary nodes: lattice points on the boundary, then domain vertices, then feet
    bkeys: list = []
    bfacet: list = []
    bindex: dict = {}

    def add_bnode(key: tuple, fid: int) -> int:
        j = bindex.get(key)
        if j is None:
            j = len(bkeys)
            bindex[key] = j
            bkeys.append(key)
            bfacet.append(fid)
        return j

    for Yb, sl in zip(Ycand[onbd], slack[onbd]):
        add_bnode(tuple(Fraction(int(c), scale) for c in Yb), int(np.argmin(sl)))
    for v in domain.vertices:
        fid = next(i for i, (a, b, _) in enumerate(facets) if ex.dot(a, v) == b)
        add_bnode(tuple(v), fid)

    D = len(dirs)
    nbr = np.full((D, 2, N), -1, dtype=np.int64)
    theta = np.ones((D, 2, N))
    foot = np.full((D, 2, N), -1, dtype=np.int64)
    dense = np.full(shape, -1, dtype=np.int64)
    dense[tuple((m_int - lo).T)] = np.arange(N)
    ss = C[None, :] - Y_int @ A.T  # (N, facets) positive
    snapped: set = set()
    for di in range(D):
        for s, sign in enumerate((1, -1)):
            t = sign * (A @ dint[di])  # (facets,)
            nb_m = m_int + sign * dsteps[di]
            rel = nb_m - lo
            okbox = np.all((rel >= 0) & (rel < np.array(shape)), axis=1)
            cand = np.full(N, -1, dtype=np.int64)
            cand[okbox] = dense[tuple(rel[okbox].T)]
            nbr[di, s] = cand
            # Shortley–Weller fractions for arms leaving the open domain
            pos_t = t > 0
            for a_i in np.nonzero(cand < 0)[0]:
                sl = ss[a_i]
                best, fid = Fraction(1), -1
                for f in np.nonzero(pos_t)[0]:
                    th = Fraction(int(sl[f]), int(t[f]))
                    if th < best or (fid < 0 and th == best):
                        best, fid = th, int(f)
                numer = [Fraction(int(Y_int[a_i, c]) * best.denominator
                                  + best.numerator * sign * int(dint[di, c]),
                                  best.denominator * scale) for c in range(n)]
                theta[di, s, a_i] = float(best)
                foot[di, s, a_i] = add_bnode(tuple(numer), fid)
    bkeys_l = bkeys
    bpos = np.array([[float(c) for c in kk] for kk in bkeys_l])
    grid = Grid(domain, nu, k, h, scale, m_int, Y_int, dirs, tuple(axes), dsteps,
                nbr, theta, foot, bpos, bkeys_l, np.array(bfacet), facets)
    return _snap(grid) if float(theta.min()) < THETA_SNAP else grid


def _snap(g: Grid) -> Grid:
    """Turn nodes with a nearly vanishing stencil arm into boundary nodes."""
    bad = np.any(g.theta < THETA_SNAP, axis=(0, 1))
    keep = np.nonzero(~bad)[0]
    if len(keep) == 0:
        raise GridError("no interior nodes after snapping; refine h")
    remap = np.full(g.n_interior, -1, dtype=np.int64)
    remap[keep] = np.arange(len(keep))
    bpos = list(g.bpos)
    bkeys = list(g.bkeys)
    bfacet = list(g.bfacet)
    newb = {}
    for i in np.nonzero(bad)[0]:
        newb[i] = len(bkeys)
        bkeys.append(tuple(Fraction(int(c), g.scale) for c in g.Y[i]))
        bpos.append(g.Y[i] / g.scale)
        # facet of the shortest arm
        di, s = np.unravel_index(np.argmin(g.theta[:, :, i]), g.theta.shape[:2])
        bfacet.append(g.bfacet[g.foot[di, s, i]])
    nbr = g.nbr[:, :, keep].copy()
    theta = g.theta[:, :, keep].copy()
    foot = g.foot[:, :, keep].copy()
    for di in range(len(g.dirs)):
        for s in range(2):
            row = nbr[di, s]
            hit = (row >= 0) & bad[np.maximum(row, 0)]
            for a in np.nonzero(hit)[0]:
                foot[di, s, a] = newb[row[a]]
                theta[di, s, a] = 1.0
            row[row >= 0] = remap[row[row >= 0]]
    return Grid(g.domain, g.normal, g.k, g.h, g.scale, g.m[keep], g.Y[keep], g.dirs,
                g.dir_axes, g.steps, nbr, theta, foot, np.array(bpos), bkeys,
                np.array(bfacet), g.facets, snapped=np.array(sorted(newb.values())))


# -- boundary data --------------------------------------------------------------


@dataclass
class BoundaryData:
    """Dirichlet data: a vectorized function or one affine map per facet."""

    func: Callable[[np.ndarray], np.ndarray] | None = None
    affine: dict | None = None  # facet vertex key -> (alpha, beta)
    description: str = ""
    bump: Callable | None = None  # (positions, facet ids) -> additive perturbation

    @classmethod
    def from_function(cls, f: Callable[[np.ndarray], np.ndarray], description: str = "") -> "BoundaryData":
        return cls(func=f, description=description)

    @classmethod
    def piecewise_linear(cls, domain: Polytope, vertex_value: Callable, description: str = "") -> "BoundaryData":
        """Data that is affine on each facet, fixed by its values at the vertices."""
        aff = {}
        for a, b, verts in domain_facets(domain):
            V = np.array([[float(c) for c in v] for v in verts])
            vals = np.array([float(vertex_value(v)) for v in verts])
            M = np.hstack([V, np.ones((len(V), 1))])
            coef, *_ = np.linalg.lstsq(M, vals, rcond=None)
            if np.max(np.abs(M @ coef - vals)) > 1e-12 * (1 + np.max(np.abs(vals))):
                raise GridError("boundary data is not linear on a facet")
            aff[verts] = (coef[:-1], coef[-1])
        return cls(affine=aff, description=description)

    def with_bump(self, bump: Callable) -> "BoundaryData":
        return BoundaryData(self.func, self.affine, self.description + " (perturbed)", bump)

    def values(self, grid: Grid) -> np.ndarray:
        if self.func is not None:
            out = np.asarray(self.func(grid.bpos), dtype=float)
        else:
            out = np.empty(grid.n_boundary)
            for fid, (_, _, verts) in enumerate(grid.facets):
                sel = grid.bfacet == fid
                alpha, beta = self.affine[verts]
                out[sel] = grid.bpos[sel] @ alpha + beta
        if self.bump is not None:
            out = out + self.bump(grid.bpos, grid.bfacet)
        return out


# -- operator -------------------------------------------------------------------


def _gather(grid: Grid, u: np.ndarray, ub: np.ndarray) -> np.ndarray:
    ext = np.concatenate([u, ub.astype(u.dtype)])
    idx = np.where(grid.nbr >= 0, grid.nbr, grid.n_interior + grid.foot)
    return ext[idx]  # (D, 2, N)


def _operator(grid: Grid, u: np.ndarray, ub: np.ndarray, coef: np.ndarray | None = None,
              want_coef: bool = False):
    h = float(grid.h)
    U = _gather(grid, u, ub)
    th = grid.theta
    hp, hm = th[:, 0] * h, th[:, 1] * h  # (D, N)
    Ep = (U[:, 0] - u) / hp
    Em = (u - U[:, 1]) / hm
    if coef is None:
        # nodal gradient from nonuniform central differences along every d_i
        c = (hm * hm * (U[:, 0] - u) + hp * hp * (u - U[:, 1])) / (hp * hm * (hp + hm))
        grad = np.einsum("dn,dk->nk", c, grid.dirs)  # (N, n)
        coef = np.empty(th.shape, dtype=u.dtype)
        dn2 = np.sum(grid.dirs ** 2, axis=1)
        for di in range(len(grid.dirs)):
            d = grid.dirs[di]
            for s, E in ((0, Ep[di]), (1, Em[di])):
                other = grid.nbr[di, s]
                back = grid.nbr[di, 1 - s]
                inner = other >= 0
                gm = np.empty_like(grad)
                gm[inner] = 0.5 * (grad[inner] + grad[other[inner]])
                out = ~inner
                hasb = out & (back >= 0)
                gm[hasb] = 1.5 * grad[hasb] - 0.5 * grad[back[hasb]]
                lone = out & (back < 0)
                gm[lone] = grad[lone]
                gm += np.outer((E - gm @ d) / dn2[di], d)
                coef[di, s] = 1.0 / np.sqrt(1.0 + np.sum(gm * gm, axis=1))
    R = np.sum(2.0 * (coef[:, 0] * Ep - coef[:, 1] * Em) / (hp + hm), axis=0)
    return (R, coef) if want_coef else R


def _footprint_pairs(grid: Grid):
    """Structural (row, col) pairs of the Jacobian and a lattice colouring."""
    n1 = grid.m.shape[1]
    st = [np.zeros(n1, dtype=np.int64)]
    for s in grid.steps:
        st += [s, -s]
    offs = {tuple(a + b) for a in st for b in st}
    lo = grid.m.min(0) - 4
    hi = grid.m.max(0) + 4
    shape = tuple(hi - lo + 1)
    dense = np.full(shape, -1, dtype=np.int64)
    dense[tuple((grid.m - lo).T)] = np.arange(grid.n_interior)
    rows, cols = [], []
    for o in sorted(offs):
        q = dense[tuple((grid.m + np.array(o) - lo).T)]
        ok = q >= 0
        rows.append(np.nonzero(ok)[0])
        cols.append(q[ok])
    rows, cols = np.concatenate(rows), np.concatenate(cols)
    mod = 4 * int(np.max(np.abs(grid.steps))) + 1
    color = np.zeros(grid.n_interior, dtype=np.int64)
    for j in range(n1):
        color = color * mod + np.mod(grid.m[:, j], mod)
    return rows, cols, color


def _jacobian(grid: Grid, u: np.ndarray, ub: np.ndarray, coef=None) -> sp.csr_matrix:
    pairs = getattr(grid, "_pairs", None)
    if pairs is None:
        pairs = _footprint_pairs(grid)
        grid._pairs = pairs
    rows, cols, color = pairs
    N = grid.n_interior
    vals = np.zeros(len(rows))
    ccol = color[cols]
    for c in np.unique(color):
        pert = u.astype(complex)
        pert[color == c] += 1j * EPS_CS
        R = _operator(grid, pert, ub, coef)
        sel = ccol == c
        vals[sel] = R.imag[rows[sel]] / EPS_CS
    keep = vals != 0
    return sp.csr_matrix((vals[keep], (rows[keep], cols[keep])), shape=(N, N))


# -- grid functions ---------------------------------------------------------------


@dataclass(eq=False)
class GridFunction:
    grid: Grid
    values: np.ndarray  # interior
    bvalues: np.ndarray  # boundary nodes
    history: list = field(default_factory=list)
    converged: bool = False
    iterations: int = 0
    picard_steps: int = 0

    def residual(self) -> float:
        return residual(self)

    def all_positions(self) -> np.ndarray:
        return np.vstack([self.grid.pos, self.grid.bpos])

    def all_values(self) -> np.ndarray:
        return np.concatenate([self.values, self.bvalues])

    def lift(self) -> np.ndarray:
        """Graph points ``y + u nu_hat`` in R^n (interior first, then boundary)."""
        return self.all_positions() + np.outer(self.all_values(), self.grid.unit_normal)

    def value_at(self, y_exact: Sequence) -> float:
        i = self.grid.node_index(y_exact)
        if i is not None:
            return float(self.values[i])
        j = self.grid.boundary_index(y_exact)
        if j is None:
            raise KeyError("no grid node at that position")
        return float(self.bvalues[j])

    def to_csv(self, path) -> None:
        n1 = self.grid.m.shape[1]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"m{j}" for j in range(n1)] + ["value"])
            for mi, v in zip(self.grid.m.tolist(), self.values.tolist()):
                w.writerow(mi + [repr(v)])

    def invariance_defect(self, matrix, translation=None, sign: float = 1.0, shift: float = 0.0) -> float:
        """``max |u(M y + t) - (sign u(y) + shift)|`` over interior nodes.

        ``matrix``/``translation`` are exact and must map the lattice onto
        itself; returns inf when an image is not an interior node.
        """
        M = np.array([[int(x) if Fraction(x).denominator == 1 else np.nan for x in r] for r in matrix])
        if np.isnan(M).any():
            raise GridError("only integer matrices act on the scaled lattice")
        M = M.astype(np.int64)
        t = np.zeros(self.grid.n, dtype=np.int64)
        if translation is not None:
            tt = [Fraction(c) * self.grid.scale for c in translation]
            if any(c.denominator != 1 for c in tt):
                return math.inf
            t = np.array([int(c) for c in tt], dtype=np.int64)
        img = self.grid.Y @ M.T + t
        look = self.grid._lookup()
        idx = [look.get(tuple(r)) for r in img.tolist()]
        if any(i is None for i in idx):
            return math.inf
        idx = np.array(idx)
        return float(np.max(np.abs(self.values[idx] - (sign * self.values + shift))))


def residual(gf: GridFunction) -> float:
    R = _operator(gf.grid, gf.values, gf.bvalues)
    return float(np.max(np.abs(R))) if len(R) else 0.0


def harmonic_lift(grid: Grid, ub: np.ndarray) -> np.ndarray:
    """Solution of the discrete Laplace problem (the frozen operator with a = 1)."""
    ones = np.ones(grid.theta.shape)
    z = np.zeros(grid.n_interior)
    L = _jacobian(grid, z, ub, ones)
    r = _operator(grid, z, ub, ones)
    return spla.spsolve(L.tocsc(), -r)


def solve_mse(grid: Grid, data: BoundaryData, tol: float = 1e-10, max_iter: int = 200,
              initial: np.ndarray | None = None, raise_on_fail: bool = True) -> GridFunction:
    """Damped Newton for the discrete minimal-graph equation.

    The line search asks for a decrease of the sup-norm residual; after five
    rejected halvings one lagged-coefficient (Picard) step is taken instead.
    """
    ub = data.values(grid)
    u = harmonic_lift(grid, ub) if initial is None else np.array(initial, dtype=float)
    hist, picard = [], 0
    for it in range(max_iter + 1):
        r = _operator(grid, u, ub)
        rn = float(np.max(np.abs(r)))
        if not math.isfinite(rn):
            raise DivergedError("residual is not finite", hist)
        hist.append(rn)
        if rn <= tol:
            return GridFunction(grid, u, ub, hist, True, it, picard)
        if it == max_iter:
            break
        J = _jacobian(grid, u, ub)
        try:
            du = spla.spsolve(J.tocsc(), -r)
        except RuntimeError:
            du = np.full_like(u, np.nan)
        alpha, accepted = 1.0, False
        if np.all(np.isfinite(du)):
            for _ in range(6):
                un = u + alpha * du
                rnn = float(np.max(np.abs(_operator(grid, un, ub))))
                if math.isfinite(rnn) and rnn < (1.0 - 1e-4 * alpha) * rn:
                    accepted = True
                    break
                alpha *= 0.5
        if accepted:
            u = un
            continue
        # lagged coefficients: one exact solve of the frozen linear operator
        _, coef = _operator(grid, u, ub, want_coef=True)
        L = _jacobian(grid, u, ub, coef)
        step = spla.spsolve(L.tocsc(), -r)
        if not np.all(np.isfinite(step)):
            raise DivergedError("lagged-coefficient step diverged", hist)
        picard += 1
        u = u + step
    gf = GridFunction(grid, u, ub, hist, False, max_iter, picard)
    if raise_on_fail:
        raise SolverError(f"no convergence after {max_iter} steps (residual {hist[-1]:.3e})", hist)
    return gf


# -- closed-form oracles -----------------------------------------------------------


def scherk1_exact(x, y):
    """``log cos x - log cos y`` for |x|, |y| < pi/2."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if np.any(np.abs(x) >= math.pi / 2) or np.any(np.abs(y) >= math.pi / 2):
        raise ValueError("need |x|, |y| < pi/2")
    out = np.log(np.cos(x)) - np.log(np.cos(y))
    return float(out) if out.ndim == 0 else out


def scherk2_implicit(x, y, z):
    """``sin z - sinh x sinh y``; zero on the surface."""
    out = np.sin(z) - np.sinh(x) * np.sinh(y)
    return float(out) if np.ndim(out) == 0 else out


def scherk_slope(k: int) -> float:
    """Slope ``c_k`` for which the graph of ``c_k |x_1|`` opens at angle pi/k.

    With direction vectors (1, c) and (-1, c), ``cos theta = (c^2-1)/(c^2+1)``,
    and theta = pi/k gives ``c = cot(pi/(2k))``.
    """
    if int(k) != k or k < 2:
        raise ValueError("k must be an integer >= 2")
    return 1.0 / math.tan(math.pi / (2 * k))


def sheet_angle(c: float) -> float:
    u, v = np.array([1.0, c]), np.array([-1.0, c])
    return float(math.acos(np.clip(u @ v / (u @ u), -1.0, 1.0)))


def scherk2_graph(x1, x2, width: float):
    """Height of the singly periodic Scherk surface over the strip ``0 <= x2 <= width``.

    In the rotated frame ``X = (x3 - x1)/sqrt 2``, ``Y = (x3 + x1)/sqrt 2``,
    ``Z = x2`` with scale ``l = width/pi`` this is the zero set of
    ``sin(Z/l) - sinh(X/l) sinh(Y/l)``, which is the graph
    ``x3 = (l/sqrt 2) arccosh(cosh(sqrt 2 x1/l) + 2 sin(x2/l))``.
    """
    lam = width / math.pi
    x1, x2 = np.asarray(x1, dtype=float), np.asarray(x2, dtype=float)
    return lam / math.sqrt(2) * np.arccosh(np.cosh(math.sqrt(2) * x1 / lam) + 2 * np.sin(x2 / lam))


def scherk2_distance(points: np.ndarray, width: float) -> np.ndarray:
    """First-order distance ``|F|/|grad F|`` to the rotated Scherk zero set."""
    lam = width / math.pi
    x1, x2, x3 = points[:, 0], points[:, 1], points[:, 2]
    X, Y, Z = (x3 - x1) / math.sqrt(2) / lam, (x3 + x1) / math.sqrt(2) / lam, x2 / lam
    F = scherk2_implicit(X, Y, Z)
    gX, gY, gZ = -np.cosh(X) * np.sinh(Y), -np.sinh(X) * np.cosh(Y), np.cos(Z)
    gn = np.sqrt(gX ** 2 + gY ** 2 + gZ ** 2) / lam
    return np.abs(F) / gn


# -- exhaustion ------------------------------------------------------------------


def q_box(b, sides: Sequence) -> Polytope:
    """``[-b, b] x [0, a_2] x ... x [0, a_{n-1}]`` inside ``{x_n = 0}``."""
    bnd = [(-ex.to_fraction(b), ex.to_fraction(b))]
    bnd += [(0, ex.to_fraction(a)) for a in sides]
    bnd.append((0, 0))
    return box(bnd)


def _exact_side(a) -> Fraction:
    return a if isinstance(a, Fraction) else Fraction(a).limit_denominator(1 << 16)


@dataclass
class Exhaustion:
    gf: GridFunction
    k: int
    c: float
    sides: tuple
    bs: list
    sup_changes: list
    monotone_violations: int
    min_increment: float
    h_b1_max: float
    barrier_margin: float  # min over Q_1 nodes and all b of (g + c_k - h)
    growth_margin: float  # min of (a + c_k) + c_k|x_1| - h over all nodes
    waist: float
    solves: list = field(default_factory=list)

    def window_values(self, window: float = 1.0):
        g = self.gf.grid
        pos, val = self.gf.all_positions(), self.gf.all_values()
        sel = np.abs(pos[:, 0]) <= window + 1e-12
        return pos[sel], val[sel]


def exhaust_limit(k: int, a: Sequence, h, tol: float = 1e-8, solve_tol: float = 1e-10,
                  b0: int = 1, b_max: int = 64, slack: float | None = None,
                  check: bool = True) -> Exhaustion:
    """Solve on Q_b for b = b0, 2 b0, ... until the change on Q_1 drops below ``tol``.

    ``a`` are the side lengths a_2, ..., a_{n-1}; n = len(a) + 2.  Raises
    :class:`ExhaustionError` on a monotonicity or barrier violation when
    ``check`` is set.  ``slack`` (default ``10 * solve_tol``) absorbs solver
    round-off in the pointwise comparisons.
    """
    n = len(a) + 2
    c = scherk_slope(k)
    prof = barrier_profile(n)
    wv = waist_condition(prof.a, list(a), n)
    if not wv.holds:
        raise ExhaustionError(f"side lengths violate a_i < a/sqrt(n-2) = {wv.bound:.6g}")
    sides = tuple(_exact_side(x) for x in a)
    slack = 10 * solve_tol if slack is None else slack
    data = BoundaryData.from_function(lambda y: c * np.abs(y[:, 0]), "c_k |x_1|")
    prev: dict | None = None
    bs, changes, solves = [], [], []
    violations, min_inc = 0, math.inf
    barrier, growth, hb1 = math.inf, math.inf, -math.inf
    b = b0
    gf = None
    while b <= b_max:
        grid = discretize(q_box(b, sides), h, normal=[0] * (n - 1) + [1])
        gf = solve_mse(grid, data, tol=solve_tol)
        solves.append({"b": b, "nodes": grid.n_interior, "iterations": gf.iterations,
                       "residual": gf.history[-1]})
        keys = {tuple(r): v for r, v in zip(grid.Y.tolist(), gf.values.tolist())}
        pos = gf.grid.pos
        in1 = np.abs(pos[:, 0]) <= 1 + 1e-12
        q = pos[in1][:, : n - 1]
        g = half_catenoid_g(prof, q)
        barrier = min(barrier, float(np.min(g + c - gf.values[in1])))
        growth = min(growth, float(np.min(prof.a + c + c * np.abs(pos[:, 0]) - gf.values)))
        if b == 1:
            hb1 = float(np.max(gf.values[in1]))
        bs.append(b)
        if prev is not None:
            shared = [kk for kk in prev if kk in keys]
            inc = np.array([keys[kk] - prev[kk] for kk in shared])
            min_inc = min(min_inc, float(inc.min()))
            violations += int(np.sum(inc < -slack))
            q1 = np.array([abs(kk[0]) <= grid.scale for kk in shared])
            changes.append(float(np.max(np.abs(inc[q1]))))
        if check and violations:
            raise ExhaustionError(f"monotonicity in b violated at b = {b}")
        if check and barrier <= 0:
            raise ExhaustionError(f"barrier g + c_k violated at b = {b}")
        prev = keys
        if changes and changes[-1] < tol:
            break
        b *= 2
    return Exhaustion(gf, k, c, sides, bs, changes, violations, min_inc, hb1, barrier,
                      growth, prof.a, solves)
