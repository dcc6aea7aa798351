"""Command line entry point: ``ktour <command> ...``.

Exit codes: 0 ok, 1 validation found violations, 2 input error,
3 capability refusal, 4 internal invariant failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bench
from .exact import exact_ktc
from .fileio import (
    ParseError,
    format_instance,
    format_solution,
    read_instance,
    read_solution,
    write_instance,
)
from .generate import DISTRIBUTIONS, describe, generate
from .heuristics import bounds
from .model import CapabilityError, InfeasibleError, InvariantError, radial_cost, validate
from .pipeline import StageError, reduce, solve
from .render import render_svg

EXIT_OK, EXIT_INVALID, EXIT_INPUT, EXIT_REFUSED, EXIT_INTERNAL = 0, 1, 2, 3, 4


def _load(path):
    if not Path(path).is_file():
        raise FileNotFoundError(path)
    return read_instance(path)


def _emit(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _report(cost: float, lower: float):
    ratio = 1.0 if cost == lower else (cost / lower if lower > 0 else float("inf"))
    print(f"cost {cost:.12g}")
    print(f"lower_bound {lower:.12g}")
    print(f"ratio {ratio:.6f}")


def cmd_solve(args):
    inst = _load(args.inp)
    sol = solve(inst, args.eps, args.base, threads=args.threads, guard=not args.no_guard,
                period=args.period)
    lb = bounds(inst).opt_lower
    meta = dict(sol.meta)
    meta["lower_bound"] = lb
    if args.out:
        Path(args.out).write_text(format_solution(sol, meta))
    _report(sol.cost, lb)
    return EXIT_OK


def cmd_exact(args):
    inst = _load(args.inp)
    sol = exact_ktc(inst)
    if args.out:
        Path(args.out).write_text(format_solution(sol, {"solver": "exact"}))
    _report(sol.cost, sol.cost)
    return EXIT_OK


def cmd_reduce(args):
    inst = _load(args.inp)
    red = reduce(inst, args.eps, refine=not args.global_cap)
    info = dict(red.log)
    info["mandatory_tours"] = len(red.mandatory_tours)
    info["segment_points_total"] = red.segment_points()
    _emit(json.dumps(info, sort_keys=True, indent=1, default=float) + "\n", args.out)
    return EXIT_OK


def cmd_lb(args):
    inst = _load(args.inp)
    b = bounds(inst)
    print(f"radial {b.radial:.12g}")
    print(f"tsp_upper {b.tsp_upper:.12g}")
    print(f"opt_lower {b.opt_lower:.12g}")
    print(f"opt_upper {b.opt_upper:.12g}")
    return EXIT_OK


def cmd_validate(args):
    inst = _load(args.inp)
    sol = read_solution(args.solution)
    report = validate(inst, sol)
    for v in report:
        print(f"{v.kind}: {v.detail}")
    if report:
        return EXIT_INVALID
    print(f"feasible cost {sol.cost:.12g} radial {radial_cost(inst):.12g}")
    return EXIT_OK


def cmd_gen(args):
    inst = generate(args.n, args.k, args.seed, args.dist)
    text_comment = describe(args.n, args.k, args.seed, args.dist)
    if args.out:
        write_instance(inst, args.out, text_comment)
    else:
        sys.stdout.write(format_instance(inst, text_comment))
    return EXIT_OK


def cmd_render(args):
    inst = _load(args.inp)
    sol = read_solution(args.solution) if args.solution else None
    _emit(render_svg(inst, sol, show_grid=args.show_grid, eps=args.eps), args.out)
    return EXIT_OK


def cmd_bench(args):
    suite = json.loads(Path(args.suite).read_text())
    rows = bench.run_suite(suite, threads=args.threads)
    if args.out:
        Path(args.out).write_text(bench.to_jsonl(rows))
    print(bench.to_table(rows))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ktour", description="Euclidean k-tour cover toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    def with_in(sp):
        sp.add_argument("--in", dest="inp", required=True, help="instance file")
        return sp

    s = with_in(sub.add_parser("solve", help="solve through the reduction"))
    s.add_argument("--eps", type=float, default=0.5)
    s.add_argument("--base", choices=["exact", "heuristic"], default="heuristic")
    s.add_argument("--out")
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--no-guard", action="store_true", help="do not fall back to the direct heuristic")
    s.add_argument("--period", type=int, help="override the ring marking period (diagnostics)")
    s.set_defaults(func=cmd_solve)

    s = with_in(sub.add_parser("reduce", help="print the reduction provenance"))
    s.add_argument("--eps", type=float, default=0.5)
    s.add_argument("--global-cap", action="store_true", help="single segment, global capping")
    s.add_argument("--out")
    s.set_defaults(func=cmd_reduce)

    s = with_in(sub.add_parser("lb", help="lower and upper bounds"))
    s.set_defaults(func=cmd_lb)

    s = with_in(sub.add_parser("exact", help="exact optimum (small instances)"))
    s.add_argument("--out")
    s.set_defaults(func=cmd_exact)

    s = with_in(sub.add_parser("validate", help="check a solution file against an instance"))
    s.add_argument("--solution", required=True)
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("gen", help="generate a random instance")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--dist", choices=DISTRIBUTIONS, default="uniform-disk")
    s.add_argument("--out")
    s.set_defaults(func=cmd_gen)

    s = with_in(sub.add_parser("render", help="draw an instance as SVG"))
    s.add_argument("--solution")
    s.add_argument("--out")
    s.add_argument("--show-grid", action="store_true")
    s.add_argument("--eps", type=float, default=0.5)
    s.set_defaults(func=cmd_render)

    s = sub.add_parser("bench", help="run a benchmark suite")
    s.add_argument("--suite", required=True)
    s.add_argument("--out", help="JSON-lines results")
    s.add_argument("--threads", type=int, default=1)
    s.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: no such file: {exc.filename or exc.args[0]}", file=sys.stderr)
        return EXIT_INPUT
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CapabilityError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except StageError as exc:
        print(f"internal error in stage '{exc.stage}': {exc.cause}", file=sys.stderr)
        return EXIT_INTERNAL
    except (InvariantError, InfeasibleError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
