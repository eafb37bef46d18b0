"""Command-line front end: claim ledger, surface builds, mesh slicing.

Exit codes: 0 when every check comes out as expected, 1 on a deviation,
2 on a usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import exact as ex
from .isometry import (check_cone_obstruction, check_invariant, compose, hyperplane_table, reflect,
                       rho_face, rho_K)
from .msesolver import ExhaustionError
from .polytope import PolytopeError, diagonal_hyperplane, make_cube, slice_polytope, spine
from .surfaces.mesh import MeshError, merge_meshes, read_ndoff, slice_mesh, write_ndoff, write_obj, write_off

EXIT_OK, EXIT_DEVIATION, EXIT_USAGE = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    surface: str | None = None
    dim: int | None = None
    k: int | None = None
    sides: list = field(default_factory=list)
    h: str | None = None
    tol: float = 1e-10
    out: str | None = None
    jobs: int = 1
    report: str | None = None
    seed: int = 0
    samples: int = 2000
    n_range: list = field(default_factory=list)
    mesh: str | None = None
    normal: list = field(default_factory=list)
    offset: float = 0.0
    labyrinths: bool = False
    timings: bool = False

    def h_fraction(self) -> Fraction:
        return ex.parse(self.h)


# -- claim ledger ----------------------------------------------------------------


def claims_for(n: int) -> list[dict]:
    """Exact invariance claims in R^n with the verdict the geometry predicts."""
    low = n <= 4
    L, Q, P, Ht = spine(n), make_cube(n), slice_polytope(n), diagonal_hyperplane(n)
    out = []

    def over_pairs(obj, name: str, expected: bool) -> dict:
        first_fail = None
        pairs = ((i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1))
        for i, j in pairs:
            v = check_invariant(rho_K(n, i, j), obj, f"rho_K{i}{j}({name}) = {name}")
            if not v.holds:
                first_fail = (i, j, v)
                break
        entry = {"claim": f"rho_Kij({name}) = {name} for all i < j", "n": n,
                 "holds": first_fail is None, "expected": expected}
        if first_fail is not None:
            i, j, v = first_fail
            entry["witness"] = {"i": i, "j": j, "point": [ex.fmt(x) for x in v.witness]}
        return entry

    out.append(over_pairs(L, "L_n", low))
    out.append(over_pairs(Q, "Q^n", low))
    out.append(over_pairs(P, "P_n", low))
    out.append(over_pairs(Ht, "P~_n", True))

    cone = check_cone_obstruction(n)
    d = cone.to_dict()
    d.update(claim="rho_K12(O x dB_1^+) = O x dB_2^-", expected=low)
    out.append(d)

    table = hyperplane_table(n, 1, 2)
    d = {"claim": "rho_K12 maps each {x_k = 1} onto some {x_l = -1}", "n": n,
         "holds": all(table[str(k)] for k in range(1, n + 1)), "expected": low, "table": table}
    out.append(d)

    bad = [(i, j) for i in range(2, n + 1) for j in range(i + 1, n + 1)
           if compose(rho_face(n, i), rho_face(n, j)) != compose(reflect(n, i), reflect(n, j))]
    out.append({"claim": "rho_i o rho_j = lambda_i o lambda_j", "n": n, "holds": not bad,
                "expected": True, **({"witness": {"pairs": bad}} if bad else {})})
    return out


def cmd_verify_claims(cfg: RunConfig) -> tuple[dict, int]:
    t0 = time.perf_counter()
    ns = list(cfg.n_range)
    if cfg.jobs > 1 and len(ns) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            per_n = list(pool.map(claims_for, ns))
    else:
        per_n = [claims_for(n) for n in ns]
    claims = [c for block in per_n for c in block]
    ok = all(c["holds"] == c["expected"] for c in claims)
    return {"claims": claims, "timings": {"verify_claims": time.perf_counter() - t0}}, \
        EXIT_OK if ok else EXIT_DEVIATION


# -- builds ----------------------------------------------------------------------


def _write_meshes(out: Path, stem: str, fundamental, merged) -> list[str]:
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for tag, m in (("fundamental", fundamental), ("period", merged)):
        p = out / f"{stem}_{tag}.ndoff"
        write_ndoff(p, m)
        files.append(p.name)
        if m.n == 3:
            for ext, writer in ((".off", write_off), (".obj", write_obj)):
                q = out / f"{stem}_{tag}{ext}"
                writer(q, m.vertices, m.cells)
                files.append(q.name)
    return files


def cmd_build(cfg: RunConfig) -> tuple[dict, int]:
    h = cfg.h_fraction()
    timings = {}
    t0 = time.perf_counter()
    if cfg.surface == "p":
        from .surfaces.pschwarz import assemble_p, build_p_fundamental, verify_labyrinths, verify_p

        sigma = build_p_fundamental(h, tol=cfg.tol)
        surf = assemble_p(h, tol=cfg.tol, sigma1=sigma)
        timings["build"] = time.perf_counter() - t0
        rep = verify_p(surf, samples=cfg.samples, seed=cfg.seed)
        if cfg.labyrinths:
            rep.add(verify_labyrinths(surf))
        stem = "p_n4"
    elif cfg.surface == "d":
        from .surfaces.dschwarz import assemble_d, build_d_fundamental, verify_d

        sigma = build_d_fundamental(cfg.dim, h, tol=cfg.tol)
        surf = assemble_d(cfg.dim, h, tol=cfg.tol, sigma5=sigma)
        timings["build"] = time.perf_counter() - t0
        rep = verify_d(surf, samples=cfg.samples, seed=cfg.seed)
        stem = f"d_n{cfg.dim}"
    else:
        from .surfaces.scherk import build_scherk, verify_scherk

        surf = build_scherk(cfg.dim, cfg.k, [ex.parse(a) for a in cfg.sides], h, solve_tol=cfg.tol)
        sigma = surf.base["sigma8"]
        timings["build"] = time.perf_counter() - t0
        rep = verify_scherk(surf, samples=cfg.samples, seed=cfg.seed)
        stem = f"s_n{cfg.dim}_k{cfg.k}"
    timings["verify"] = time.perf_counter() - t0 - timings["build"]
    files = []
    if cfg.out:
        files = _write_meshes(Path(cfg.out), stem, sigma, merge_meshes(surf.meshes()))
    checks = [c.to_dict() for c in rep.checks]
    build = {"surface": cfg.surface, "params": surf.params, "files": files,
             "cells": int(sigma.ncells), "patches": len(surf.patches), "checks": checks,
             "holds": all(c["holds"] for c in checks)}
    return {"builds": [build], "timings": timings}, EXIT_OK if build["holds"] else EXIT_DEVIATION


def cmd_slice(cfg: RunConfig) -> tuple[dict, int]:
    mesh = read_ndoff(cfg.mesh)
    verts, tris = slice_mesh(mesh, cfg.normal, cfg.offset)
    files = []
    if cfg.out:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        stem = Path(cfg.mesh).stem + "_slice"
        write_off(out / f"{stem}.off", verts, tris)
        write_obj(out / f"{stem}.obj", verts, tris)
        files = [f"{stem}.off", f"{stem}.obj"]
    return {"builds": [{"slice": {"mesh": cfg.mesh, "normal": cfg.normal, "offset": cfg.offset,
                                  "vertices": len(verts), "triangles": len(tris), "files": files}}]}, EXIT_OK


# -- argument handling -------------------------------------------------------------


def _parse_range(s: str) -> list[int]:
    s = s.strip()
    if not s:
        return []
    if ".." in s:
        a, b = s.split("..")
        return list(range(int(a), int(b) + 1))
    return [int(x) for x in s.split(",") if x]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="minhyper", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--report", help="JSON report path (default: stdout)")
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--timings", action="store_true", help="include wall-clock timings in the report")

    vc = sub.add_parser("verify-claims", help="exact invariance ledger")
    vc.add_argument("--n-range", default="3..6", help="e.g. 3..6 or 3,5 (empty for none)")
    common(vc)

    b = sub.add_parser("build", help="build and verify P, D or Scherk surfaces")
    b.add_argument("--surface", choices=["p", "d", "s"], required=True)
    b.add_argument("--dim", type=int)
    b.add_argument("--k", type=int, default=2)
    b.add_argument("--sides", default="", help="a_2,...,a_{n-1} (fractions allowed)")
    b.add_argument("--h", default="1/16")
    b.add_argument("--tol", type=float, default=1e-10)
    b.add_argument("--out")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--samples", type=int, default=2000)
    b.add_argument("--labyrinths", action="store_true",
                   help="P only: voxel count of complementary components (slow)")
    common(b)

    s = sub.add_parser("slice", help="cross-section of an ND-OFF mesh in R^4")
    s.add_argument("--mesh", required=True)
    s.add_argument("--normal", required=True, help="comma separated, e.g. 0,0,0,1")
    s.add_argument("--offset", type=float, default=0.0)
    s.add_argument("--out")
    common(s)
    return ap


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cmd = args.command
    cfg = RunConfig(cmd, report=args.report, jobs=args.jobs, timings=args.timings)
    if cfg.jobs < 1:
        raise ConfigError("--jobs must be >= 1")
    if cmd == "verify-claims":
        cfg.n_range = _parse_range(args.n_range)
        if any(n < 3 for n in cfg.n_range):
            raise ConfigError("dimensions must be >= 3")
    elif cmd == "build":
        cfg.surface, cfg.k, cfg.tol, cfg.out = args.surface, args.k, args.tol, args.out
        cfg.seed, cfg.samples, cfg.h = args.seed, args.samples, args.h
        cfg.labyrinths = args.labyrinths
        if cfg.labyrinths and cfg.surface != "p":
            raise ConfigError("--labyrinths applies to the P surface only")
        cfg.sides = [x.strip() for x in args.sides.split(",") if x.strip()]
        try:
            h = ex.parse(cfg.h)
            sides = [ex.parse(a) for a in cfg.sides]
        except (ValueError, ZeroDivisionError) as e:
            raise ConfigError(f"bad number: {e}") from None
        if h <= 0:
            raise ConfigError("--h must be positive")
        if cfg.surface == "p":
            if args.dim not in (None, 4):
                raise ConfigError(f"the P surface lives in R^4; got --dim {args.dim}")
            cfg.dim = 4
        elif cfg.surface == "d":
            cfg.dim = 3 if args.dim is None else args.dim
            if not 3 <= cfg.dim <= 6:
                raise ConfigError("D surfaces are built for 3 <= n <= 6")
        else:
            cfg.dim = args.dim if args.dim is not None else len(sides) + 2
            if cfg.k < 2:
                raise ConfigError("Scherk towers need k >= 2")
            if not cfg.sides:
                cfg.sides = ["1/2"] * (cfg.dim - 2)
                sides = [Fraction(1, 2)] * (cfg.dim - 2)
            if len(sides) != cfg.dim - 2:
                raise ConfigError(f"--sides needs n - 2 = {cfg.dim - 2} values")
            if any(a <= 0 for a in sides):
                raise ConfigError("side lengths must be positive")
            from .catenoid import barrier_profile, waist_condition

            wv = waist_condition(barrier_profile(cfg.dim).a, [float(a) for a in sides], cfg.dim)
            if not wv.holds:
                raise ConfigError(f"waist condition a_i < a/sqrt(n-2) = {wv.bound:.6g} violated")
    else:
        cfg.mesh, cfg.out, cfg.offset = args.mesh, args.out, args.offset
        try:
            cfg.normal = [float(x) for x in args.normal.split(",")]
        except ValueError as e:
            raise ConfigError(f"bad normal: {e}") from None
        if len(cfg.normal) != 4 or not any(cfg.normal):
            raise ConfigError("--normal needs four components, not all zero")
    return cfg


def _emit(report: dict, path: str | None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if path:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _plain(v):
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, Fraction):
        return ex.fmt(v)
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, np.ndarray):
        return _plain(v.tolist())
    return v


def run(cfg: RunConfig) -> int:
    handler = {"verify-claims": cmd_verify_claims, "build": cmd_build, "slice": cmd_slice}[cfg.command]
    result, code = handler(cfg)
    report = {"config": asdict(cfg), "claims": result.get("claims", []),
              "builds": result.get("builds", []),
              "timings": result.get("timings", {}) if cfg.timings else {}}
    _emit(_plain(report), cfg.report)
    return code


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        return run(config_from_args(args))
    except (ConfigError, ExhaustionError, PolytopeError, MeshError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE

if __name__ == "__main__":
    sys.exit(main())
