from __future__ import annotations

from fractions import Fraction as F

import numpy as np
import pytest
from scipy.spatial import Delaunay

from minhyper.isometry import group_G0
from minhyper.surfaces.pschwarz import (
    PObstructionError, build_p_fundamental, p_corner_points, reflected_double_dihedral, sigma4_motions,
    solve_p_graph, verify_labyrinths,
)
from minhyper.surfaces.mesh import PatchMesh
from minhyper.surfaces.verify import complement_components


def check(rep, prefix):
    return next(c for c in rep.checks if c.claim.startswith(prefix))


class TestRefusal:
    @pytest.mark.parametrize("n", [5, 6])
    def test_obstruction_cited(self, n):
        with pytest.raises(PObstructionError) as e:
            build_p_fundamental(F(1, 8), n=n)
        assert e.value.verdict is not None and not e.value.verdict.holds
        assert "K_12" in str(e.value)

    def test_n3_not_built(self):
        with pytest.raises(PObstructionError):
            solve_p_graph(F(1, 8), n=3)


class TestCoarse:
    def test_all_checks_pass_at_h_eighth(self, p_coarse):
        _, rep = p_coarse
        failing = [c.claim for c in rep.checks if not c.holds]
        assert not failing

    def test_patch_count(self, p_coarse):
        surf, _ = p_coarse
        assert len(sigma4_motions()) == 8 and len(surf.patches) == 8 * 16

    def test_orthogonality_away_from_corners(self, p_coarse):
        c = check(p_coarse[1], "P: Sigma_1 meets")
        assert c.details["max_away_from_singular"] < c.measured
        worst = np.asarray(c.details["worst_at"])
        assert np.min(np.linalg.norm(p_corner_points() - worst, axis=1)) < 0.5

    def test_spine_and_planes(self, p_coarse):
        rep = p_coarse[1]
        assert check(rep, "P: boundary inside Q^4").measured <= 1e-12
        assert check(rep, "P: three orthogonal planes").measured == 3

    def test_reflected_double_is_twice_the_meet_angle(self, p_coarse):
        surf, rep = p_coarse
        sigma1 = surf.base["sigma1"]
        d = reflected_double_dihedral(sigma1, 5 / 8)
        meet = check(rep, "P: Sigma_1 meets").measured
        assert d.details["unmatched"] == 0
        assert d.measured == pytest.approx(2 * np.arcsin(meet), abs=1e-9)


class TestNegativeControl:
    def test_perturbed_datum_breaks_g0(self):
        gf = solve_p_graph(F(1, 8), perturb=0.05)
        worst = max(gf.invariance_defect(g.matrix) for g in group_G0(4).elements())
        assert worst > 1e-3

    def test_unperturbed_is_invariant(self, p_coarse):
        assert check(p_coarse[1], "P: solved graph invariant").measured <= 1e-9


def test_two_labyrinths(p_coarse):
    c = verify_labyrinths(p_coarse[0])
    assert c.holds and c.details["components"] == 2
    assert c.details["voxels"][0] == c.details["voxels"][1]


def test_complement_of_one_plane_is_connected():
    # a single hyperplane {x_4 = 0} in a periodic cell leaves one slab after gluing
    g = np.linspace(-1, 3, 5)
    pts = np.array([[a, b, c, 0.0] for a in g for b in g for c in g])
    cells = Delaunay(pts[:, :3]).simplices
    info = complement_components([PatchMesh(4, pts, cells)], -np.ones(4), 4.0, 0.25)
    assert info["components"] == 1
