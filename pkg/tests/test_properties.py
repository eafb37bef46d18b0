"""Property tests over random exact and float data."""

from __future__ import annotations

from fractions import Fraction as F

import numpy as np
from hypothesis import given, settings, strategies as st

from minhyper import exact as ex
from minhyper.isometry import FloatMotion, compose, perm_isometry, reflect, rho_K, rho_face, translate
from minhyper.msesolver import BoundaryData, discretize, solve_mse
from minhyper.polytope import make_cube, project_to_hyperplane, slice_polytope

fractions = st.fractions(min_value=-5, max_value=5, max_denominator=12)


def points(n):
    return st.lists(fractions, min_size=n, max_size=n)


@st.composite
def pair(draw, n_lo=3, n_hi=7):
    n = draw(st.integers(n_lo, n_hi))
    i, j = draw(st.lists(st.integers(1, n), min_size=2, max_size=2, unique=True))
    return n, i, j


@st.composite
def motions(draw, n):
    perm = draw(st.permutations(list(range(1, n + 1))))
    g = perm_isometry(perm)
    for i in draw(st.sets(st.integers(1, n))):
        g = compose(reflect(n, i, draw(fractions)), g)
    return compose(translate(draw(points(n))), g)


class TestIsometries:
    @given(pair())
    def test_rho_k_involution(self, nij):
        n, i, j = nij
        r = rho_K(n, i, j)
        assert compose(r, r).is_identity()

    @given(pair(), st.data())
    def test_rho_k_fixes_axis(self, nij, data):
        n, i, j = nij
        x = data.draw(points(n))
        # force x into K_ij = {x_i + x_j = 0} n {sum = 0}
        x[j - 1] = -x[i - 1]
        rest = [k for k in range(n) if k not in (i - 1, j - 1)]
        x[rest[-1]] = -sum(x[k] for k in rest[:-1])
        assert rho_K(n, i, j)(x) == ex.point(x)

    @given(pair(), st.data())
    def test_rho_k_preserves_diagonal_hyperplane(self, nij, data):
        n, i, j = nij
        x = data.draw(points(n))
        # the axis lies in {sum = 0}, so the diagonal direction is reversed
        assert sum(rho_K(n, i, j)(x)) == -sum(x)

    @given(st.integers(3, 7).flatmap(lambda n: st.tuples(st.just(n), st.integers(2, n))))
    def test_rho_face_involution(self, ni):
        n, i = ni
        r = rho_face(n, i)
        assert compose(r, r).is_identity() and r.det() == 1

    @given(st.integers(3, 5).flatmap(lambda n: st.tuples(motions(n), motions(n), motions(n))))
    @settings(max_examples=40)
    def test_composition_associative(self, abc):
        a, b, c = abc
        assert compose(compose(a, b), c) == compose(a, compose(b, c))

    @given(st.integers(3, 5).flatmap(lambda n: st.tuples(motions(n), points(n))))
    @settings(max_examples=40)
    def test_inverse(self, gx):
        g, x = gx
        assert g.inverse()(g(x)) == ex.point(x)

    @given(st.integers(3, 5).flatmap(lambda n: st.tuples(motions(n), motions(n))))
    @settings(max_examples=30)
    def test_float_motion_agrees(self, ab):
        a, b = ab
        fa = FloatMotion(a.float_matrix(), a.float_translation())
        fb = FloatMotion(b.float_matrix(), b.float_translation())
        pts = np.random.default_rng(0).normal(size=(5, a.n))
        assert np.allclose((fa @ fb).apply_float(pts), compose(a, b).apply_float(pts), atol=1e-12)


class TestExact:
    @given(st.integers(3, 7).flatmap(lambda n: st.tuples(points(n), points(n))))
    def test_projection_idempotent(self, pn):
        p, nv = pn
        if not any(nv):
            return
        q = project_to_hyperplane(p, nv)
        assert ex.dot(q, nv) == 0 and project_to_hyperplane(q, nv) == q

    @given(st.integers(3, 6).flatmap(lambda n: st.tuples(st.just(n), points(n))))
    def test_cube_membership_matches_bounds(self, nx):
        n, x = nx
        assert make_cube(n).contains(x) == all(-1 <= c <= 1 for c in x)

    @given(st.integers(3, 4), points(4), st.data())
    def test_low_dim_slice_is_rho_k_invariant(self, n, x, data):
        i, j = data.draw(st.lists(st.integers(1, n), min_size=2, max_size=2, unique=True))
        y = project_to_hyperplane(x[:n], [1] * n)
        s = max(abs(c) for c in y) or F(1)
        y = [c / s for c in y]  # now inside the cube and on the diagonal hyperplane
        L = slice_polytope(n)
        assert L.contains(y) and L.contains(rho_K(n, i, j)(y))

    @given(fractions, fractions)
    def test_fmt_parse_roundtrip(self, a, b):
        assert ex.parse(ex.fmt(a)) == a and ex.parse(ex.fmt(b)) == b


class TestSolver:
    grid = discretize(slice_polytope(3), F(1, 8))

    @given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2))
    @settings(max_examples=15, deadline=None)
    def test_affine_data_reproduced(self, a, b, c):
        # affine functions solve the equation and the stencil is exact on them
        f = lambda y: a * y[:, 0] + b * y[:, 1] + c
        gf = solve_mse(self.grid, BoundaryData.from_function(f))
        assert np.max(np.abs(gf.values - f(self.grid.pos))) < 1e-8

    @given(st.floats(0.1, 2.0))
    @settings(max_examples=10, deadline=None)
    def test_maximum_principle(self, amp):
        f = lambda y: amp * np.sin(3 * y[:, 0]) * np.cos(2 * y[:, 1])
        gf = solve_mse(self.grid, BoundaryData.from_function(f))
        ub = gf.bvalues
        assert gf.values.max() <= ub.max() + 1e-9 and gf.values.min() >= ub.min() - 1e-9
