from __future__ import annotations

from fractions import Fraction as F

import numpy as np
import pytest

from minhyper import exact as ex
from minhyper.isometry import identity, reflect, translate
from minhyper.msesolver import BoundaryData, discretize, solve_mse
from minhyper.polytope import box
from minhyper.surfaces.mesh import MeshError, mesh_graph
from minhyper.surfaces.verify import (
    PeriodicSurface, VerificationReport, seam_dihedral, simplex_overlap_depth, verify_embedded_sample,
    verify_orthogonal_meet,
)


def graph_mesh(f, h=F(1, 8)):
    g = discretize(box([(-1, 1), (-1, 1), (0, 0)]), h)
    return mesh_graph(solve_mse(g, BoundaryData.from_function(f)))


@pytest.fixture(scope="module")
def saddle():
    return graph_mesh(lambda y: 0.5 * (y[:, 0] ** 2 - y[:, 1] ** 2))


class TestOverlapDepth:
    def test_crossing_triangles(self):
        P = np.array([[-1, -1, 0], [1, -1, 0], [0, 1, 0]], dtype=float)
        Q = np.array([[0, -0.5, -1], [0, -0.5, 1], [0, 0.5, 0]], dtype=float)
        assert simplex_overlap_depth(P, Q) > 0.05

    def test_disjoint(self):
        P = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], dtype=float)
        assert simplex_overlap_depth(P, P + [0, 0, 1]) < 0

    def test_shared_edge_is_not_overlap(self):
        P = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], dtype=float)
        Q = np.array([[0, 0, 0], [1, 0, 0], [0, -1, 0.3]], dtype=float)
        assert simplex_overlap_depth(P, Q) <= 1e-9


class TestEmbedded:
    def test_overlapped_copy_flagged(self, saddle):
        mirror = saddle.transformed(reflect(3, 3, offset=F(1, 20)))
        c = verify_embedded_sample([saddle, mirror], samples=4000)
        assert not c.holds and c.details["intersection"]["depth"] > 1e-6

    def test_separated_copy_passes(self, saddle):
        lifted = saddle.transformed(translate((0, 0, 3)))
        c = verify_embedded_sample([saddle, lifted])
        assert c.holds and c.details["candidates"] == 0

    def test_glued_neighbours_pass(self, saddle):
        # the half-turn about the boundary line {x_1 = 1, x_3 = 1/2} continues the saddle
        nb = saddle.transformed(translate((2, 0, 0)))
        c = verify_embedded_sample([saddle, nb])
        assert c.holds


class TestOrthogonalMeet:
    def test_planar_patch_in_its_own_hyperplane(self):
        flat = graph_mesh(lambda y: 0 * y[:, 0])
        # every boundary facet lies in {x_3 = 0}, and so does the conormal: reported, not raised
        c = verify_orthogonal_meet(flat, (np.array([0.0, 0, 1]), 0.0), 0.1)
        assert not c.holds and c.measured == pytest.approx(1.0)

    def test_graph_meets_side_walls(self):
        m = graph_mesh(lambda y: 0 * y[:, 0] + 0.3)
        c = verify_orthogonal_meet(m, (np.array([1.0, 0, 0]), 1.0), 1e-12)
        assert c.holds

    def test_no_facets(self, saddle):
        with pytest.raises(MeshError):
            verify_orthogonal_meet(saddle, (np.array([1.0, 0, 0]), 7.0), 0.1)


class TestSeam:
    def test_mirrored_plane_seam(self):
        m = graph_mesh(lambda y: 0.5 * y[:, 1])
        lab = next(k for k, f in m.tags.items() if np.allclose(m.vertices[np.unique(f)][:, 0], 1.0))
        other = m.transformed(reflect(3, 1, offset=1))
        c = seam_dihedral(m, lab, [other], lab, 1e-9)
        assert c.holds and c.details["unmatched"] == 0

    def test_creased_seam_reported(self):
        m = graph_mesh(lambda y: 0.5 * y[:, 0])
        lab = next(k for k, f in m.tags.items() if np.allclose(m.vertices[np.unique(f)][:, 0], 1.0))
        other = m.transformed(reflect(3, 1, offset=1))
        c = seam_dihedral(m, lab, [other], lab, 0.1)
        assert not c.holds and c.measured == pytest.approx(2 * np.arctan(0.5), abs=1e-9)


class TestPeriodic:
    def _surf(self, patches):
        base = {"m": graph_mesh(lambda y: 0 * y[:, 0])}
        return PeriodicSurface("T", {}, base, patches, [ex.scale(2, ex.unit(3, 1)), ex.scale(2, ex.unit(3, 2))])

    def test_lattice_permutes(self):
        s = self._surf([("m", identity(3)), ("m", translate((1, 0, 0)))])
        assert s.lattice_permutes_patches()

    def test_lower_rank_lattice_keeps_normal_offset(self):
        s = self._surf([("m", identity(3)), ("m", translate((0, 0, 1)))])
        assert s.lattice_permutes_patches()

    def test_duplicate_patches_detected(self):
        s = self._surf([("m", identity(3)), ("m", translate((2, 0, 0)))])
        assert not s.lattice_permutes_patches()


def test_report_roundtrip():
    from minhyper.surfaces.verify import Check

    r = VerificationReport()
    r.add(Check("c", "anchor", True, np.float64(0.5), 1.0, {"x": np.arange(3)}))
    d = r.checks[0].to_dict()
    assert d["measured"] == 0.5 and d["details"]["x"] == [0, 1, 2]
