from __future__ import annotations

from fractions import Fraction

import pytest


@pytest.fixture(scope="session")
def p_coarse():
    """P surface at h = 1/8 with its verification report."""
    from minhyper.surfaces.pschwarz import assemble_p, build_p_fundamental, verify_p

    h = Fraction(1, 8)
    surf = assemble_p(h, sigma1=build_p_fundamental(h))
    return surf, verify_p(surf)


@pytest.fixture(scope="session")
def d3_coarse():
    from minhyper.surfaces.dschwarz import assemble_d, verify_d

    surf = assemble_d(3, Fraction(1, 8))
    return surf, verify_d(surf)


@pytest.fixture(scope="session")
def s32_coarse():
    from minhyper.surfaces.scherk import build_scherk, verify_scherk

    surf = build_scherk(3, 2, [Fraction(1, 2)], Fraction(1, 8))
    return surf, verify_scherk(surf)


ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, msg = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {msg}")
