from __future__ import annotations

import itertools
from fractions import Fraction as F

import numpy as np
import pytest

from minhyper import exact as ex
from minhyper.isometry import (
    FloatMotion, Isometry, IsometryError, antipodal, apply, check_cone_obstruction, check_invariant,
    compose, expected_order, group_G0, group_G1, group_G2, hyperplane_table, identity, orbit,
    perm_isometry, reflect, rho_face, rho_K, swap, translate,
)
from minhyper.polytope import diagonal_hyperplane, face_B, make_cube, slice_polytope, spine


class TestConstruction:
    def test_identity_permutation(self):
        assert perm_isometry((1, 2, 3, 4)) == identity(4)

    def test_swap_acts(self):
        assert swap(4, 1, 2)((1, 0, 0, 0)) == (0, 1, 0, 0)

    def test_non_bijection(self):
        with pytest.raises(IsometryError):
            perm_isometry((1, 1, 3))

    def test_non_orthogonal(self):
        with pytest.raises(IsometryError):
            Isometry(((1, 1, 0), (0, 1, 0), (0, 0, 1)), (0, 0, 0))

    def test_orbit_of_b1(self):
        imgs = orbit(group_G1(4).elements(), face_B(4, 1, +1))
        assert {p.key() for p in imgs} == {face_B(4, i, +1).key() for i in range(1, 5)}

    def test_swap_phi_b1(self):
        assert apply(compose(swap(4, 1, 2), antipodal(4)), face_B(4, 1, +1)).same_set(face_B(4, 2, -1))


class TestRhoK:
    def test_n3(self):
        r = rho_K(3, 1, 2)
        assert r((F(1), F(2), F(3))) == (-2, -1, -3)

    def test_n4(self):
        assert rho_K(4, 1, 2)((1, 2, 3, 4)) == (-2, -1, -4, -3)

    def test_n5_formula(self):
        x = (F(1), F(2), F(3), F(5), F(7))
        y = rho_K(5, 1, 2)(x)
        assert y[:2] == (-2, -1)
        assert all(y[k] == x[k] - F(2, 3) * (x[2] + x[3] + x[4]) for k in (2, 3, 4))

    def test_same_index(self):
        with pytest.raises(IsometryError):
            rho_K(4, 2, 2)

    @pytest.mark.parametrize("n", [3, 4, 5, 6])
    def test_involution_fixing_axis(self, n):
        for i, j in itertools.combinations(range(1, n + 1), 2):
            r = rho_K(n, i, j)
            assert compose(r, r).is_identity() and r.det() == 1
            # spanning set of K_ij: null space of {e_i + e_j, (1,...,1)}
            u = [1 if k in (i - 1, j - 1) else 0 for k in range(n)]
            for v in ex.nullspace([u, [1] * n], n):
                assert r(v) == v


class TestFaceRotations:
    def test_rho2_origin(self):
        assert rho_face(4, 2)((0, 0, 0, 0)) == (2, 0, 0, 0)

    def test_rho_translation_agree_at_origin(self):
        t = translate((2, 0, 0, 0))
        assert all(rho_face(4, i)(ex.zero(4)) == t(ex.zero(4)) for i in range(2, 5))

    def test_involution(self):
        r = rho_face(5, 2)
        assert compose(r, r).is_identity()

    @pytest.mark.parametrize("n", [3, 4, 5, 6])
    def test_rho_rho_is_lambda_lambda(self, n):
        for i, j in itertools.combinations(range(2, n + 1), 2):
            assert compose(rho_face(n, i), rho_face(n, j)) == compose(reflect(n, i), reflect(n, j))

    def test_i_equal_one_rejected(self):
        with pytest.raises(IsometryError):
            rho_face(4, 1)


class TestBasicMotions:
    def test_reflect(self):
        assert reflect(3, 2)((1, 5, 0)) == (1, -5, 0)

    def test_translations_cancel(self):
        assert compose(translate((2, 0, 0, 0)), translate((-2, 0, 0, 0))).is_identity()

    def test_antipodal_involution(self):
        assert compose(antipodal(5), antipodal(5)).is_identity()

    def test_compose_order(self):
        a, b = translate((1, 0, 0)), reflect(3, 1)
        assert compose(a, b)((1, 0, 0)) == a(b((1, 0, 0))) == (0, 0, 0)

    def test_dimension_mismatch(self):
        with pytest.raises(IsometryError):
            apply(identity(3), make_cube(4))

    def test_float_motion_composition(self):
        rot = FloatMotion(np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]), np.zeros(3))
        m = rot @ translate((1, 0, 0))
        assert np.allclose(m.apply_float(np.zeros((1, 3))), [[0.0, 1.0, 0.0]])


class TestInvariance:
    @pytest.mark.parametrize("n", [3, 4])
    def test_low_dims_hold(self, n):
        for i, j in itertools.combinations(range(1, n + 1), 2):
            r = rho_K(n, i, j)
            for obj in (spine(n), make_cube(n), slice_polytope(n)):
                assert check_invariant(r, obj).holds

    @pytest.mark.parametrize("n", [5, 6])
    def test_high_dims_fail_with_witness(self, n):
        r = rho_K(n, 1, 2)
        for obj in (spine(n), make_cube(n), slice_polytope(n)):
            v = check_invariant(r, obj)
            assert not v.holds and v.witness is not None
            assert not obj.contains(v.witness)

    @pytest.mark.parametrize("n", [3, 4, 5, 6])
    def test_diagonal_hyperplane_invariant(self, n):
        assert check_invariant(rho_K(n, 1, 2), diagonal_hyperplane(n)).holds

    def test_n5_cube_witness(self):
        assert check_invariant(rho_K(5, 1, 2), make_cube(5)).witness == (-1, -1, F(-5, 3), F(1, 3), F(1, 3))

    @pytest.mark.parametrize("n,holds", [(3, True), (4, True), (5, False), (6, False)])
    def test_cone_obstruction(self, n, holds):
        v = check_cone_obstruction(n)
        assert v.holds is holds
        if not holds:
            assert "second_plus_kth" in v.details and v.witness is not None

    def test_hyperplane_table(self):
        t4 = hyperplane_table(4, 1, 2)
        assert t4 == {"1": [2], "2": [1], "3": [4], "4": [3]}
        t5 = hyperplane_table(5, 1, 2)
        assert t5["1"] == [2] and all(t5[str(k)] == [] for k in (3, 4, 5))


class TestGroups:
    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_orders(self, n):
        assert group_G0(n).order() == expected_order("G0", n)
        assert group_G1(n).order() == expected_order("G1", n)
        assert group_G2(n).order() == expected_order("G2", n)

    def test_g0_fixes_x1(self):
        assert all(g((1, 0, 0, 0)) == (1, 0, 0, 0) for g in group_G0(4).elements())
