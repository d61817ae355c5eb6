"""Command-line interface: ``hypatt <command> ...``.

Exit codes: 0 success, 1 inadmissible input or failed check, 2 unreadable
or invalid input, 3 the solver gave up.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from typing import Optional, Sequence

from . import io
from .admissibility import check_admissible
from .errors import (
    DegenerateInput,
    HypattError,
    InvalidInput,
    NotAdmissible,
    NumericalFailure,
    PreconditionViolated,
    ValidationFailure,
)
from .lorentz import normalize_small_caps, random_disjoint_caps
from .patterns import build_pattern_from_any_caps, verify_hyperideal, verify_ideal
from .polyhedron import HyperidealPolyhedron, truncate
from .realizer import SolveOptions, gram_matrix, solve
from .render import RenderStyle, render_svg

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3


def _default_seed() -> int:
    raw = os.environ.get("HYPATT_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"error: HYPATT_SEED must be an integer, got {raw!r}")


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        io.write_text(out, text)
    else:
        sys.stdout.write(text)


def cmd_check(args) -> int:
    g = io.read_graph(args.graph)
    try:
        verdict = check_admissible(g)
    except InvalidInput as exc:
        print(f"error: {args.graph}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(verdict.describe())
    return EXIT_OK if verdict.admissible else EXIT_FAIL


def cmd_solve(args) -> int:
    g = io.read_graph(args.graph)
    opts = SolveOptions(
        max_iterations=args.max_iter, residual_tolerance=args.tol, restarts=args.restarts, seed=args.seed
    )
    try:
        report = solve(g, opts)
    except InvalidInput as exc:
        print(f"error: {args.graph}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NotAdmissible as exc:
        print(exc.verdict.describe(), file=sys.stderr)
        return EXIT_FAIL
    except (NumericalFailure, ValidationFailure) as exc:
        print(f"solver failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    _emit(io.dumps(io.report_to_json(report)), args.out)
    print(
        f"solved: residual {report.residual_norm:.3e}, {report.iterations} iterations, "
        f"restart {report.restarts_used}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_build(args) -> int:
    caps = io.read_caps(args.caps)
    try:
        pattern = build_pattern_from_any_caps(caps)
    except (PreconditionViolated, DegenerateInput) as exc:
        print(f"cannot build: {exc}", file=sys.stderr)
        return EXIT_FAIL
    _emit(io.dumps(io.pattern_to_json(pattern)), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    pattern = io.read_pattern(args.pattern)
    report = verify_ideal(pattern) if pattern.is_ideal else verify_hyperideal(pattern)
    if report.ok:
        print("pass")
        return EXIT_OK
    print(f"fail: {', '.join(sorted(report.kinds()))}")
    print(str(report))
    return EXIT_FAIL


def cmd_truncate(args) -> int:
    pattern = io.read_pattern(args.pattern)
    if not pattern.caps:
        print("cannot truncate: pattern has no caps (ideal vertices)", file=sys.stderr)
        return EXIT_FAIL
    try:
        # small caps keep every polyhedron vertex at a finite point
        _, caps = normalize_small_caps(pattern.caps)
        poly = HyperidealPolyhedron.from_caps(caps)
        truncated = truncate(poly)
    except HypattError as exc:
        print(f"cannot truncate: {exc}", file=sys.stderr)
        return EXIT_FAIL
    _emit(truncated.to_off(), args.out)
    return EXIT_OK


def cmd_gram(args) -> int:
    pattern = io.read_pattern(args.pattern)
    G = gram_matrix(pattern)
    _emit(io.dumps({"gram": [[float(x) for x in row] for row in G]}), args.out)
    return EXIT_OK


def cmd_random(args) -> int:
    try:
        caps = random_disjoint_caps(args.count, args.seed)
    except HypattError as exc:
        print(f"cannot generate: {exc}", file=sys.stderr)
        return EXIT_FAIL
    _emit(io.dumps(io.caps_to_json(caps)), args.out)
    return EXIT_OK


def cmd_render(args) -> int:
    pattern = io.read_pattern(args.pattern)
    try:
        style = RenderStyle(width_px=args.width, project_from=args.project_from)
        svg = render_svg(pattern, style)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    _emit(svg, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hypatt", description="Hyperideal circle patterns.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="decide whether a weighted graph satisfies the angle conditions")
    p.add_argument("graph")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("solve", help="realize a weighted graph as a circle pattern")
    p.add_argument("graph")
    p.add_argument("--out", help="pattern file to write (default stdout)")
    p.add_argument("--seed", type=int, default=None, help="restart seed (default $HYPATT_SEED or 0)")
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--tol", type=float, default=1e-12, help="residual norm tolerance")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("build", help="pattern from a caps file via the convex hull")
    p.add_argument("caps")
    p.add_argument("--out")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("verify", help="check every condition on a pattern file")
    p.add_argument("pattern")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("truncate", help="truncated polyhedron of a pattern as OFF text")
    p.add_argument("pattern")
    p.add_argument("--out")
    p.set_defaults(func=cmd_truncate)

    p = sub.add_parser("gram", help="matrix of inversive products of a pattern")
    p.add_argument("pattern")
    p.add_argument("--out")
    p.set_defaults(func=cmd_gram)

    p = sub.add_parser("random", help="random pairwise disjoint caps")
    p.add_argument("count", type=int)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_random)

    p = sub.add_parser("render", help="SVG drawing of a pattern")
    p.add_argument("pattern")
    p.add_argument("--out")
    p.add_argument("--width", type=int, default=800)
    p.add_argument(
        "--project-from",
        default="interstice",
        help="projection pole: 'interstice' (default), 'north', or 'vertex-K' (a point on circle K)",
    )
    p.set_defaults(func=cmd_render)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "seed", 0) is None:
        args.seed = _default_seed()
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "solve" and (args.max_iter <= 0 or args.restarts <= 0 or args.tol <= 0 or args.seed < 0):
            raise ValueError("--max-iter, --restarts and --tol must be positive and --seed non-negative")
        return args.func(args)
    except io.ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
