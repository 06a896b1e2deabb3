"""Command-line entry point.

Reports are JSON on disk (or stdout); human-readable summaries go to
stderr. Exit codes: 0 success, 1 input or data error, 2 step limit, 64
usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import genex, verify
from .errors import FlipMeshError, ParseError
from .flipper import FlipConfig, RunStatus, Strategy, delaunayify, global_schedule
from .geom import DEFAULT_TOL, Tolerances
from .mesh import format_off, load_off, validate, write_atomic

EXIT_OK = 0
EXIT_DATA = 1
EXIT_STEP_LIMIT = 2
EXIT_USAGE = 64

STRATEGIES = {"greedy": Strategy.GREEDY, "fifo": Strategy.FIFO}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="RNG seed (FLIPMESH_SEED overrides)")
    p.add_argument("--report", type=Path, help="write the JSON report here instead of stdout")
    p.add_argument("--timing", action="store_true", help="add wall-clock time to the report")
    p.add_argument("--tau-angle", type=float, default=DEFAULT_TOL.angle)
    p.add_argument("--tau-plane", type=float, default=DEFAULT_TOL.plane)
    p.add_argument("--tau-deg", type=float, default=DEFAULT_TOL.deg)
    p.add_argument("--tau-area", type=float, default=DEFAULT_TOL.area)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="flipmesh", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("delaunayify", help="switch diagonals until the mesh is Delaunay")
    p.add_argument("input", type=Path)
    p.add_argument("output", type=Path)
    p.add_argument("--strategy", choices=sorted(STRATEGIES), default="greedy")
    p.add_argument("--strict", action="store_true", help="also switch non-coplanar edges with sum exactly pi")
    p.add_argument("--max-steps", type=int)
    p.add_argument("--global-radius", type=float, help="run the disk schedule with this ball radius")
    p.add_argument("--global-eps", type=float, help="edge-length bound for the disk schedule")
    _common(p)

    p = sub.add_parser("check", help="run the verification suite on a mesh")
    p.add_argument("input", type=Path)
    p.add_argument("--delta", type=float, help="density radius")
    p.add_argument("--theta", type=float, help="flatness angle (radians)")
    p.add_argument("--r", type=float, help="flatness ball radius")
    p.add_argument("--pi8", action="store_true", help="check every triple plane against one fitted plane")
    p.add_argument("--proxy", type=Path, help="fine reference mesh for density (default: the input)")
    _common(p)

    p = sub.add_parser("gen", help="generate a surface fixture from a JSON spec")
    p.add_argument("spec", type=Path)
    p.add_argument("output", type=Path)
    p.add_argument("--measure", action="store_true", help="measure delta, theta and r into the sidecar")
    _common(p)

    p = sub.add_parser("thin", help="build the thin-triangle example")
    p.add_argument("output", type=Path)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--base", type=Path, help="planar base triangulation (default: unit equilateral)")
    p.add_argument("--threshold", type=float, default=5.0, help="thin angle threshold in degrees")
    _common(p)

    p = sub.add_parser("planar", help="flip-triangulate 2-D points and compare with the brute-force oracle")
    p.add_argument("input", type=Path, help='whitespace-separated "x y" lines')
    p.add_argument("--output", type=Path, help="write the triangulation as OFF")
    _common(p)
    return parser


def _seed(args) -> int:
    env = os.environ.get("FLIPMESH_SEED")
    if env is None:
        return args.seed
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"FLIPMESH_SEED={env!r} is not an integer") from None


def _tol(args) -> Tolerances:
    return Tolerances(angle=args.tau_angle, plane=args.tau_plane, deg=args.tau_deg, area=args.tau_area)


def _emit(args, payload: dict) -> None:
    text = json.dumps(payload, indent=1, sort_keys=True) + "\n"
    if args.report is None:
        sys.stdout.write(text)
    else:
        write_atomic(args.report, text)


def _sidecar(path: Path) -> Path:
    return path.with_suffix(".json")


def _distinct(*paths) -> None:
    real = [os.path.abspath(p) for p in paths if p is not None]
    if len(set(real)) != len(real):
        raise UsageError("input and output paths must differ")


def cmd_delaunayify(args) -> int:
    _distinct(args.input, args.output, args.report)
    if args.max_steps is not None and args.max_steps < 1:
        raise UsageError("--max-steps must be at least 1")
    if (args.global_radius is None) != (args.global_eps is None):
        raise UsageError("--global-radius and --global-eps go together")
    tol = _tol(args)
    try:
        m = load_off(args.input)
    except (FlipMeshError, OSError) as exc:
        _emit(args, {"status": "InputError", "error": f"{type(exc).__name__}: {exc}"})
        raise
    problems = validate(m)
    if problems:
        _emit(args, {"status": "InputError", "error": "invalid mesh",
                     "violations": [[v.kind, v.index, v.detail] for v in problems]})
        for v in problems[:10]:
            print(f"{v.kind} at {v.index}: {v.detail}", file=sys.stderr)
        return EXIT_DATA
    cfg = FlipConfig(STRATEGIES[args.strategy], args.strict, args.max_steps, tol, _seed(args))
    if args.global_radius is not None:
        report = global_schedule(m, args.global_radius, args.global_eps, cfg)
    else:
        report = delaunayify(m, cfg)
    check = verify.is_delaunay(m, tol)
    report.verification = {
        "delaunay": check.ok,
        "strict": check.strict,
        "violations": [sorted(m.edge_vertices(e)) for e in check.violations],
        "embedded": verify.is_embedded(m, tol).ok,
    }
    _emit(args, report.to_dict(include_timing=args.timing))
    print(f"{report.status.value}: {len(report.flips)} flips, "
          f"{len(report.remaining_violations)} violated edges left", file=sys.stderr)
    if report.status is RunStatus.STEP_LIMIT:
        return EXIT_STEP_LIMIT
    if not report.ok:
        for u, v in report.remaining_violations:
            print(f"edge {u}-{v} still violated", file=sys.stderr)
        return EXIT_DATA
    write_atomic(args.output, format_off(m))
    return EXIT_OK


def cmd_check(args) -> int:
    if args.theta is not None and args.r is None:
        raise UsageError("--theta needs --r")
    _distinct(args.input, args.report, args.proxy)
    tol = _tol(args)
    seed = _seed(args)
    m = load_off(args.input)
    out: dict = {}
    passed = True
    explicit = args.delta is not None or args.theta is not None or args.pi8
    if not explicit:
        d = verify.is_delaunay(m, tol)
        e = verify.is_embedded(m, tol)
        out["delaunay"] = {"ok": d.ok, "strict": d.strict,
                           "violations": [sorted(m.edge_vertices(x)) for x in d.violations]}
        out["embedded"] = {"ok": e.ok, "offending_pairs": [list(p) for p in e.offending_pairs]}
        passed = d.ok and e.ok
    report = verify.ConditionReport()
    if args.delta is not None:
        proxy_mesh = load_off(args.proxy) if args.proxy else m
        cloud = verify.PointCloud(m.positions(), verify.MeshProxy(proxy_mesh))
        report.merge(verify.density_check(cloud, args.delta))
    if args.theta is not None:
        report.merge(verify.flatness_check(verify.PointCloud(m.positions(), r=args.r), args.theta, tol, seed))
    if args.pi8:
        report.merge(verify.pi8_check(verify.PointCloud(m.positions()), tol, seed))
    if explicit:
        passed = report.passed
    out["conditions"] = report.to_dict()
    out["passed"] = passed
    _emit(args, out)
    print("pass" if passed else "fail", file=sys.stderr)
    return EXIT_OK if passed else EXIT_DATA


def cmd_gen(args) -> int:
    _distinct(args.spec, args.output, args.report)
    try:
        raw = json.loads(args.spec.read_text())
    except json.JSONDecodeError as exc:
        print(f"spec: line {exc.lineno}: {exc.msg}", file=sys.stderr)
        return EXIT_DATA
    if "FLIPMESH_SEED" in os.environ or args.seed != 0:
        raw["seed"] = _seed(args)
    try:
        spec = genex.SurfaceSpec.from_dict(raw)
    except (TypeError, ValueError) as exc:
        print(f"spec: {exc}", file=sys.stderr)
        return EXIT_DATA
    g = genex.generate(spec, measure=args.measure)
    write_atomic(args.output, format_off(g.mesh))
    side = {"spec": spec.to_dict(), "n_vertices": g.mesh.n_vertices, "n_faces": g.mesh.n_faces,
            "measurements": g.measurements}
    write_atomic(_sidecar(args.output), json.dumps(side, indent=1, sort_keys=True) + "\n")
    if args.report is not None:
        _emit(args, side)
    print(f"{spec.kind}: {g.mesh.n_vertices} vertices, {g.mesh.n_faces} faces", file=sys.stderr)
    return EXIT_OK


def cmd_thin(args) -> int:
    _distinct(args.base, args.output, args.report)
    tol = _tol(args)
    base = load_off(args.base) if args.base else genex.equilateral_base()
    spec = genex.ThinExampleSpec(base, args.n, args.eps, math.radians(args.threshold))
    ex = genex.thin_example(spec, FlipConfig(tol=tol, seed=_seed(args)), tol)
    write_atomic(args.output, format_off(ex.mesh))
    text = json.dumps(ex.report, indent=1, sort_keys=True) + "\n"
    write_atomic(_sidecar(args.output), text)
    if args.report is not None:
        _emit(args, ex.report)
    print(f"thin_fraction {ex.thin_fraction:.4f} over {ex.mesh.n_faces} faces", file=sys.stderr)
    return EXIT_OK


def read_points_2d(path: Path) -> np.ndarray:
    rows = []
    for lineno, line in enumerate(path.read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"expected 'x y', got {len(parts)} fields", lineno)
        try:
            x, y = float(parts[0]), float(parts[1])
        except ValueError:
            raise ParseError("coordinates must be numbers", lineno) from None
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ParseError("non-finite coordinate", lineno)
        rows.append((x, y))
    if len(rows) < 3:
        raise ParseError("need at least three points")
    return np.array(rows)


def cmd_planar(args) -> int:
    _distinct(args.input, args.output, args.report)
    tol = _tol(args)
    P = read_points_2d(args.input)
    m, run = genex.flip_triangulate(P, cfg=FlipConfig(tol=tol, seed=_seed(args)))
    tri = verify.PlanarTriangulation(P, m.faces())
    disk = verify.empty_circumdisk_check(tri, tol)
    out = {"status": run.status.value, "flips": len(run.flips), "faces": sorted(tri.face_set()),
           "empty_circumdisk": {"ok": disk.ok, "offending": [[list(f), v] for f, v in disk.offending]}}
    passed = run.ok and disk.ok
    if len(P) <= verify.ORACLE_MAX_POINTS:
        oracle = verify.planar_delaunay_bruteforce(P, tol=tol)
        diff = verify.compare_triangulations(tri, oracle, tol)
        out["oracle"] = {
            "cocircular": [list(c) for c in oracle.cocircular],
            "regions": [{"vertices": list(r.vertices), "concyclic": r.concyclic} for r in diff.regions],
            "hard_mismatches": len(diff.hard_mismatches),
        }
        passed = passed and not diff.hard_mismatches
    else:
        out["oracle"] = None
    out["passed"] = passed
    if args.output is not None:
        write_atomic(args.output, format_off(m))
    _emit(args, out)
    print("pass" if passed else "fail", file=sys.stderr)
    return EXIT_OK if passed else EXIT_DATA


COMMANDS = {
    "delaunayify": cmd_delaunayify,
    "check": cmd_check,
    "gen": cmd_gen,
    "thin": cmd_thin,
    "planar": cmd_planar,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"flipmesh: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FlipMeshError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA
