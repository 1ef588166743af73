"""Command-line front end: ``twistorfam verify | fiber | surgery``.

Exit codes: 0 every claim passes, 1 some claim fails, 2 the input is malformed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .checks import SUITES, run_suites
from .familymodel import (
    ConformalInvariant,
    InvalidInvariantError,
    build_family,
    classify_fiber,
    fiber_components,
    generic_fiber_parametrization,
    intersection_conic,
    parse_rational,
    singular_candidates,
    verify_odp,
)
from .surgery import ResolutionChoice, StageError, fiber_cycle, run_pipeline, state_to_dict
from .svg import render
from .toricgeom import normal_fan, polygon_degree, selfint_from_fan

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _load_invariant(path: str | None) -> ConformalInvariant:
    if path is None:
        return ConformalInvariant.canonical()
    try:
        return ConformalInvariant.from_file(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except InvalidInvariantError as exc:
        raise InputError(f"{path}: {exc}") from None


def _write(path: str, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror}") from None


def _dump_json(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def cmd_verify(args) -> int:
    ci = _load_invariant(args.lambdas)
    only = [s for part in (args.only or []) for s in part.split(",") if s]
    bad = [s for s in only if s not in SUITES]
    if bad:
        raise InputError(f"unknown suite {bad[0]!r}; choose from {', '.join(SUITES)}")
    report = run_suites(ci, only or None)
    if not args.quiet:
        sys.stdout.write(report.to_text())
    if args.json:
        _write(args.json, report.to_json())
        _write(args.json + ".timing.json", report.timing_json())
    return EXIT_OK if report.status == "pass" else EXIT_FAIL


def cmd_fiber(args) -> int:
    ci = _load_invariant(args.lambdas)
    try:
        lam = parse_rational(args.lam)
    except InvalidInvariantError as exc:
        raise InputError(f"--lambda: {exc}") from None
    fm = build_family(ci)
    cls = classify_fiber(fm, lam)
    data: dict = {"lambda": str(lam), "class": str(cls)}
    polys, cycles = [], []
    ok = True
    if cls.kind == "smooth":
        p = generic_fiber_parametrization(fm, lam)
        fan, _ = normal_fan(p.polygon)
        cyc = selfint_from_fan(fan)
        deg = polygon_degree(p.polygon)
        ok = p.annihilates(fm.specialized(lam)) and deg == 6 and cyc.values == (-1,) * 6
        print(f"Smooth, degree {deg}, cycle {cyc.compact()}")
        if not args.quiet:
            for k, v in p.describe().items():
                print(f"  {k} = {v}")
        data.update(degree=deg, cycle=list(cyc.values), parametrization=p.describe())
        polys.append((f"fiber over {lam}", p.polygon))
        cycles.append(("boundary cycle", list(zip([f"D{k + 1}" for k in range(fan.n)], cyc.values))))
    else:
        i = cls.index
        comps = fiber_components(fm, i)
        conic = intersection_conic(fm, i)
        odps = [pt for pt in singular_candidates(fm) if pt.lam == comps[0].lam]
        degs = {polygon_degree(c.polygon) for c in comps}
        kind = "cubic" if degs == {3} else f"degree {sorted(degs)}"
        ok = degs == {3} and len(odps) == 2 and all(verify_odp(fm, pt) for pt in odps)
        print(f"{cls}: two {kind} components, conic intersection, {len(odps)} ODPs")
        comp_data = {}
        for c in comps:
            fan, _ = normal_fan(c.polygon)
            zeros = ",".join(f"x{k}" for k in sorted(c.zero_coords))
            cyc = selfint_from_fan(fan)
            if not args.quiet:
                print(f"  S{c.name}: {{{zeros}}} = 0, degree {polygon_degree(c.polygon)}, cycle {cyc.to_text()}")
            comp_data[c.name] = {"zero": sorted(c.zero_coords), "cycle": list(cyc.values), "param": c.describe()}
            polys.append((f"S{c.name}  {{{zeros}}} = 0", c.polygon))
        a, b = conic.plane[1:]
        if not args.quiet:
            print(f"  conic: x{a} x{b} = {conic.kappa} x0^2, real points: {'yes' if conic.has_real_points() else 'no'}")
            for pt in odps:
                print(f"  ODP at {pt}")
        data.update(components=comp_data, conic=f"x{a}*x{b} = {conic.kappa}*x0^2", odps=[str(p) for p in odps])
        try:
            fib = run_pipeline(fm).final.fiber(i)
            cycles.append((f"final boundary over {lam}", fiber_cycle(fib)))
        except StageError as exc:
            print(f"surgery failed: {exc}", file=sys.stderr)
            ok = False
    if args.svg:
        _write(args.svg, render(polys, cycles))
    if args.json:
        data["status"] = "pass" if ok else "fail"
        _write(args.json, _dump_json(data))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_surgery(args) -> int:
    ci = _load_invariant(args.lambdas)
    fm = build_family(ci)
    if args.choices:
        try:
            choice = ResolutionChoice.from_file(args.choices)
        except OSError as exc:
            raise InputError(f"cannot read {args.choices}: {exc.strerror}") from None
        except ValueError as exc:
            raise InputError(f"{args.choices}: {exc}") from None
    else:
        choice = ResolutionChoice.default(fm)
    try:
        run = run_pipeline(fm, choice)
    except StageError as exc:
        print(f"surgery failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if not args.quiet:
        print(f"choice: {' '.join(choice.symbols)}")
        for stage, state in run.states.items():
            print(f"== {stage}")
            for key, fib in state.fibers.items():
                cyc = fiber_cycle(fib)
                print(f"  {key:>7}: [{len(cyc)}] " + " ".join(f"{l}({a})" for l, a in cyc))
        print("contracted pairs: " + ", ".join(f"{k}:{a}/{b}" for k, (a, b) in run.pairs.items()))
    gen = run.final.fiber("generic").plus.selfint.compact()
    print(f"final generic cycle {gen}; all fibers 12-cycles: {'yes' if run.passed else 'no'}")
    if args.json:
        _write(args.json, _dump_json(state_to_dict(run.final)))
    return EXIT_OK if run.passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twistorfam", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--lambdas", metavar="PATH", help="file with six increasing rationals (default 1..6)")
        p.add_argument("--quiet", action="store_true")

    p = sub.add_parser("verify", help="run the verification suites")
    common(p)
    p.add_argument("--only", metavar="SUITE", action="append", help=f"suite subset: {', '.join(SUITES)}")
    p.add_argument("--json", metavar="PATH", help="write the structured report (timing goes to PATH.timing.json)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("fiber", help="describe the fiber over one value of lambda")
    common(p)
    p.add_argument("--lambda", dest="lam", metavar="RAT", required=True)
    p.add_argument("--svg", metavar="PATH")
    p.add_argument("--json", metavar="PATH")
    p.set_defaults(func=cmd_fiber)

    p = sub.add_parser("surgery", help="run small resolution, section blow-ups and contraction")
    common(p)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--choices", metavar="PATH", help="six lines, one '+-' or '-+' per reducible fiber")
    g.add_argument("--default", action="store_true")
    p.add_argument("--json", metavar="PATH", help="write the final pipeline state")
    p.set_defaults(func=cmd_surgery)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
