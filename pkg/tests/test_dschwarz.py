from __future__ import annotations

import math
from fractions import Fraction as F

import numpy as np
import pytest

from minhyper.surfaces.dschwarz import (
    DError, black_vertices, boundary_identity, is_black, solve_d_graph,
)


def check(rep, prefix):
    return next(c for c in rep.checks if c.claim.startswith(prefix))


class TestCombinatorics:
    @pytest.mark.parametrize("n", [3, 4, 5, 6])
    def test_apex_count(self, n):
        L = black_vertices(n)
        assert len(L) == 2 ** (n - 1) and len(set(L)) == len(L)

    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_boundary_identity_exact(self, n):
        b = boundary_identity(n)
        assert b["equal"] and b["lhs_distinct"] == b["expected"] == n * (n - 1) * 2 ** (n - 1)

    def test_parity(self):
        c = (0.5, 0.5, 0.5)
        assert is_black(c) and not is_black((1.5, 0.5, 0.5)) and is_black((1.5, 1.5, 0.5))

    def test_dimension_range(self):
        with pytest.raises(DError):
            solve_d_graph(7, F(1, 4))


class TestCoarseN3:
    def test_all_checks_pass(self, d3_coarse):
        _, rep = d3_coarse
        assert not [c.claim for c in rep.checks if not c.holds]

    def test_hexagonal_piece_through_centre(self, d3_coarse):
        surf, _ = d3_coarse
        gf = surf.base["sigma5"].info["gf"]
        assert gf.value_at((0, 0, 0)) == pytest.approx(math.sqrt(3) / 2, abs=1e-9)
        # boundary: six unit edges of the cube, none touching (0,0,0) or (1,1,1)
        verts = surf.base["sigma5"].vertices
        bnd = np.unique(np.concatenate([f.ravel() for f in surf.base["sigma5"].tags.values()]))
        P = verts[bnd]
        assert np.all(np.sum((np.abs(P) < 1e-12) | (np.abs(P - 1) < 1e-12), axis=1) >= 2)
        assert len(surf.base["sigma5"].tags) == 6

    def test_tangency_reported(self, d3_coarse):
        c = check(d3_coarse[1], "D: Sigma_5 tangent")
        assert c.measured <= c.tolerance and "ring_tilt" in str(c.details)

    def test_flat_planes(self, d3_coarse):
        c = check(d3_coarse[1], "D: n-1 flat")
        assert c.holds and c.measured <= 1e-12
