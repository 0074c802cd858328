"""Command-line front end: ``squarepeg <subcommand> ...``.

Exit codes: 0 success, 1 failed verification, 2 bad input, 3 oracle
disagreement.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .constructions import (
    ConstructionParams,
    build_n_square,
    build_nonsmooth_two_square,
    build_smooth_two_square,
    critical_c,
    default_anchors,
    max_convex_c,
)
from .curve import DEFAULT_SHARPNESS, Curve, CurveError, CurveSpec, is_convex, unit_circle_spec
from .solver import SolveConfig, Square, enumerate_squares

log = logging.getLogger("squarepeg")

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_INPUT = 2
EXIT_ORACLE = 3


class InputError(Exception):
    """Raised for unreadable files or invalid parameters."""


def _emit(payload: dict | str, out: str | None) -> None:
    text = payload if isinstance(payload, str) else json.dumps(payload, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load_spec(path: str) -> CurveSpec:
    try:
        return CurveSpec.load(path)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise InputError(f"cannot read curve spec {path}: {exc}") from exc


def _solve_config(args) -> SolveConfig:
    kwargs = {}
    if args.grid is not None:
        kwargs["grid_resolution"] = args.grid
    if args.min_side is not None:
        kwargs["min_side_length"] = args.min_side
    if args.tol is not None:
        kwargs["newton_tolerance"] = args.tol
    kwargs["threads"] = args.threads
    try:
        return SolveConfig(**kwargs)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def cmd_construct(args) -> int:
    try:
        if args.kind == "nonsmooth2":
            spec = build_nonsmooth_two_square()
        elif args.kind == "smooth2":
            if args.c is None:
                raise InputError("smooth2 needs --c")
            spec = build_smooth_two_square(args.c, args.a)
        elif args.kind == "circle":
            spec = unit_circle_spec()
        else:
            anchors = tuple(args.anchors) if args.anchors is not None else default_anchors(args.n or 1)
            if args.n is not None and len(anchors) != args.n - 1:
                raise InputError(f"--n {args.n} needs {args.n - 1} anchors, got {len(anchors)}")
            spec = build_n_square(ConstructionParams(anchors=anchors, c=args.c, a=args.a))
    except CurveError as exc:
        raise InputError(str(exc)) from exc
    _emit(spec.to_dict(), args.out)
    curve = Curve(spec)
    summary = f"{spec.name}: {len(spec.segments)} segments"
    if curve.is_smooth:
        convex, kmin = is_convex(curve)
        summary += f", convex={convex} (min curvature {kmin:.6g})"
    else:
        summary += f", {curve.corners.size} corner joints"
    print(summary, file=sys.stderr if args.out is None else sys.stdout)
    return EXIT_OK


def cmd_find_squares(args) -> int:
    from .acceptance import match_square_sets
    from .oracle import oracle_enumerate

    spec = _load_spec(args.curve)
    config = _solve_config(args)
    curve = Curve(spec)
    report = enumerate_squares(curve, config)
    payload = report.to_dict()
    code = EXIT_OK
    if args.oracle:
        found = oracle_enumerate(curve, args.oracle_resolution, config)
        same, dist = match_square_sets(report.squares, found)
        agree = same and dist < 1e-6
        payload["oracle"] = {
            "resolution": args.oracle_resolution,
            "count": len(found),
            "agree": agree,
            "hausdorff": dist if same else None,
        }
        if report.family_suspected:
            payload["oracle"]["agree"] = None
        elif not agree:
            code = EXIT_ORACLE
    if args.out and args.out.endswith(".csv"):
        _emit(report.to_csv(), args.out)
    else:
        _emit(payload, args.out)
    status = f"{spec.name}: {len(report.squares)} squares, familySuspected={report.family_suspected}"
    if args.oracle:
        status += f", oracle {payload['oracle']['count']} squares"
    print(status, file=sys.stderr)
    if code == EXIT_ORACLE:
        print("error: enumerator and oracle disagree", file=sys.stderr)
    return code


def cmd_critical_c(args) -> int:
    try:
        result = critical_c(bracket=tuple(args.bracket), a=args.a, tol=args.tol or 1e-10)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    _emit(result.to_dict(), args.out)
    return EXIT_OK


def cmd_convexity(args) -> int:
    payload = {}
    if args.arc is not None:
        U, V = args.arc
        try:
            payload["maxConvexC"] = max_convex_c(U, V, args.a)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        payload["arc"] = [U, V]
    if args.curve is not None:
        curve = Curve(_load_spec(args.curve))
        try:
            convex, kmin = is_convex(curve, samples=args.samples)
        except (CurveError, ValueError) as exc:
            raise InputError(str(exc)) from exc
        payload.update({"curve": curve.name, "convex": convex, "minCurvature": kmin, "samples": args.samples})
    if not payload:
        raise InputError("convexity needs a curve file or --arc U V")
    _emit(payload, args.out)
    return EXIT_OK


def cmd_render(args) -> int:
    from .render import render_svg

    spec = _load_spec(args.curve)
    squares: list[Square] = []
    if args.squares:
        try:
            data = json.loads(Path(args.squares).read_text())
            squares = [Square.from_dict(d) for d in data["squares"]]
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise InputError(f"cannot read squares report {args.squares}: {exc}") from exc
        if data.get("curve") != spec.name:
            log.warning("squares were computed for curve %r, rendering them on %r", data.get("curve"), spec.name)
    _emit(render_svg(Curve(spec), squares, show_locus=args.locus), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .acceptance import AcceptanceSuite, format_table

    suite = AcceptanceSuite(config=SolveConfig(threads=args.threads))
    results = suite.run(args.only)
    print(format_table(results))
    if args.out:
        Path(args.out).write_text(json.dumps([r.to_dict() for r in results], indent=2) + "\n")
    failed = [r for r in results if not r.passed]
    for r in failed:
        print(f"failed: criterion {r.number} ({r.name})", file=sys.stderr)
    return EXIT_VERIFY if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="squarepeg", description="Inscribed squares of piecewise-analytic curves.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="build a curve and write its spec as JSON")
    p.add_argument("kind", choices=["nonsmooth2", "smooth2", "nsquare", "circle"])
    p.add_argument("--c", type=float, help="bump amplitude (nsquare: same for every arc)")
    p.add_argument("--a", type=float, default=DEFAULT_SHARPNESS, help="bump sharpness")
    p.add_argument("--n", type=int, help="number of squares for nsquare")
    p.add_argument("--anchors", type=float, nargs="*", help="anchor angles in (-pi/4, pi/4)")
    p.add_argument("--out", help="output path (default: stdout)")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("find-squares", help="enumerate the inscribed squares of a curve spec")
    p.add_argument("curve", help="curve spec JSON")
    p.add_argument("--grid", type=int, help="seeds per parameter (default 24 or $SQUAREPEG_SEED_GRID)")
    p.add_argument("--min-side", type=float, help="smallest reported side length")
    p.add_argument("--tol", type=float, help="Newton residual tolerance")
    p.add_argument("--oracle", action="store_true", help="cross-check with the diagonal-pair oracle")
    p.add_argument("--oracle-resolution", type=int, default=512)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", help="report path; a .csv suffix writes one square per row")
    p.set_defaults(func=cmd_find_squares)

    p = sub.add_parser("critical-c", help="amplitude at which the bumped graph touches the locus")
    p.add_argument("--a", type=float, default=DEFAULT_SHARPNESS)
    p.add_argument("--bracket", type=float, nargs=2, default=(1.0, 1.4), metavar=("LO", "HI"))
    p.add_argument("--tol", type=float, help="bisection width (default 1e-10)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_critical_c)

    p = sub.add_parser("convexity", help="convexity of a curve, or the largest convex amplitude of an arc")
    p.add_argument("curve", nargs="?", help="curve spec JSON")
    p.add_argument("--arc", type=float, nargs=2, metavar=("U", "V"), help="polar arc endpoints")
    p.add_argument("--a", type=float, default=DEFAULT_SHARPNESS)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--out")
    p.set_defaults(func=cmd_convexity)

    p = sub.add_parser("render", help="draw a curve and its squares as SVG")
    p.add_argument("curve", help="curve spec JSON")
    p.add_argument("squares", nargs="?", help="report JSON from find-squares")
    p.add_argument("--locus", action="store_true", help="overlay the square base locus")
    p.add_argument("--out", help="SVG path (default: stdout)")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("verify", help="run the reproduction suite")
    p.add_argument("--only", type=int, nargs="*", choices=range(1, 9), metavar="K")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", help="JSON results path")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
