from __future__ import annotations

import json

import pytest

from minhyper.cli import main


def run(tmp_path, *argv, name="r.json"):
    rp = tmp_path / name
    code = main([*argv, "--report", str(rp)])
    return code, (json.loads(rp.read_text()) if rp.exists() else None), rp


class TestVerifyClaims:
    def test_ledger_exit_zero(self, tmp_path):
        code, rep, _ = run(tmp_path, "verify-claims", "--n-range", "3..6")
        assert code == 0
        assert all(c["holds"] == c["expected"] for c in rep["claims"])
        assert {c["n"] for c in rep["claims"]} == {3, 4, 5, 6}

    def test_byte_stable(self, tmp_path):
        _, _, a = run(tmp_path, "verify-claims", "--n-range", "3..5")
        text = a.read_text()
        _, _, b = run(tmp_path, "verify-claims", "--n-range", "3..5")
        assert b.read_text() == text

    def test_jobs_do_not_change_output(self, tmp_path):
        _, r1, _ = run(tmp_path, "verify-claims", "--n-range", "3..5", name="a.json")
        _, r2, _ = run(tmp_path, "verify-claims", "--n-range", "3..5", "--jobs", "2", name="b.json")
        assert r1["claims"] == r2["claims"]

    def test_empty_range(self, tmp_path):
        code, rep, _ = run(tmp_path, "verify-claims", "--n-range", "")
        assert code == 0 and rep["claims"] == [] and rep["builds"] == []

    def test_timings_opt_in(self, tmp_path):
        _, rep, _ = run(tmp_path, "verify-claims", "--n-range", "3", "--timings")
        assert "verify_claims" in rep["timings"]


class TestErrors:
    @pytest.mark.parametrize("argv", [
        ["build", "--surface", "p", "--dim", "5"],
        ["build", "--surface", "d", "--dim", "7"],
        ["build", "--surface", "s", "--dim", "3", "--k", "1"],
        ["build", "--surface", "s", "--dim", "4", "--sides", "1/2"],
        ["build", "--surface", "s", "--dim", "3", "--sides", "-1"],
        ["build", "--surface", "s", "--dim", "3", "--sides", "1", "--h", "1/4"],
        ["build", "--surface", "x"],
        ["no-such-command"],
    ])
    def test_usage_exit_two(self, tmp_path, argv):
        assert main(argv + ["--report", str(tmp_path / "e.json")]) == 2


class TestBuild:
    def test_d3_writes_meshes(self, tmp_path):
        code, rep, _ = run(tmp_path, "build", "--surface", "d", "--dim", "3", "--h", "1/8",
                           "--out", str(tmp_path / "m"), "--samples", "300")
        assert code == 0
        b = rep["builds"][0]
        assert b["holds"] and b["patches"] > 0
        assert set(b["files"]) == {f"d_n3_{t}{e}" for t in ("fundamental", "period") for e in (".ndoff", ".off", ".obj")}
        for f in b["files"]:
            assert (tmp_path / "m" / f).stat().st_size > 0

    def test_slice_p(self, tmp_path):
        code, rep, _ = run(tmp_path, "build", "--surface", "p", "--h", "1/8", "--out", str(tmp_path / "m"),
                           "--samples", "200")
        assert code == 0
        mesh = tmp_path / "m" / "p_n4_fundamental.ndoff"
        code, rep, _ = run(tmp_path, "slice", "--mesh", str(mesh), "--normal", "0,0,0,1", "--offset", "0",
                           "--out", str(tmp_path / "s"), name="s.json")
        assert code == 0 and rep["builds"][0]["slice"]["triangles"] > 0
        assert (tmp_path / "s" / "p_n4_fundamental_slice.off").exists()
        assert main(["slice", "--mesh", str(mesh), "--normal", "0,0,0,1", "--offset", "50"]) == 2
