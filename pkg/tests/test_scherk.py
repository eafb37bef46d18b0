from __future__ import annotations

import math
from fractions import Fraction as F

import numpy as np
import pytest

from minhyper.msesolver import ExhaustionError
from minhyper.surfaces.scherk import (
    ScherkError, build_scherk, pie_motion, sector_line_angles, verify_scherk, window_copies,
)


def check(rep, prefix):
    return next(c for c in rep.checks if c.claim.startswith(prefix))


class TestPieMotions:
    @pytest.mark.parametrize("k", [2, 3, 4])
    def test_sectors_tile(self, k):
        # bisector of V (angle pi/2) goes to the bisector of each chosen sector
        for slab, sectors in (((0,), range(0, 2 * k, 2)), ((1,), range(1, 2 * k, 2))):
            for j in sectors:
                m = pie_motion(3, k, [F(1, 2)], slab, j)
                p = m.apply_float(np.array([[0.0, 0.25, 1.0]]))[0]
                want = math.pi / 2 + j * math.pi / k
                assert np.allclose([p[0], p[2]], [math.cos(want), math.sin(want)], atol=1e-12)

    def test_parity_enforced(self):
        with pytest.raises(ScherkError):
            pie_motion(3, 2, [F(1, 2)], (0,), 1)

    def test_orthogonal(self):
        m = pie_motion(4, 3, [F(1, 2), F(1, 3)], (1, 0), 3)
        assert np.allclose(m.matrix.T @ m.matrix, np.eye(4))

    def test_line_angles(self):
        assert sector_line_angles(2) == pytest.approx([math.pi / 4, 3 * math.pi / 4])


class TestBuild:
    def test_all_checks_pass_n3_k2(self, s32_coarse):
        _, rep = s32_coarse
        assert not [c.claim for c in rep.checks if not c.holds]

    def test_oracle_distance(self, s32_coarse):
        c = check(s32_coarse[1], "S: n=3, k=2")
        assert c.measured <= 5 / 8

    def test_patch_count(self, s32_coarse):
        # k sectors per slab, two slabs per period direction
        assert len(s32_coarse[0].patches) == 2 * 2 ** 1

    def test_k3_embedded(self):
        surf = build_scherk(3, 3, [F(1, 2)], F(1, 8))
        rep = verify_scherk(surf)
        assert check(rep, "S: embedded").holds
        assert check(rep, "S: Sigma_S contains").details["lines_hit"] == [0, 1, 2]
        assert len(window_copies(surf)) == 9

    def test_waist_violation(self):
        with pytest.raises(ExhaustionError):
            build_scherk(4, 2, [F(4, 5), F(1, 2)], F(1, 8))

    def test_bad_k(self):
        with pytest.raises(ScherkError):
            build_scherk(3, 1, [F(1, 2)], F(1, 8))

    def test_sides_length(self):
        with pytest.raises(ScherkError):
            build_scherk(4, 2, [F(1, 2)], F(1, 8))

    def test_decay_recorded(self, s32_coarse):
        c = check(s32_coarse[1], "S: distance to the V-planes")
        assert c.holds and c.details["last"] < 1e-6
