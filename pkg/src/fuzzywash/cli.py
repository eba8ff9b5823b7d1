"""``fuzzctl``: evaluate, sweep, check, explain and simulate a controller.

Exit codes: 0 success, 1 input or file errors, 2 usage errors.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import os
import sys

import numpy as np

from .core import ConfigurationError, antecedent_degrees, evaluate_rule, fuzzify
from .dsl import ERROR, ParseError, parse_document, validate
from .simulator import DEFAULT_LOAD, CycleReport, LoadProfile, ResourceRates, compare_baseline, run_cycle
from .washctl import CENTROID, MODES, SensorCalibration, bundled_spec_path, decide

SPEC_ENV = "FUZZCTL_SPEC"


class _Failure(Exception):
    """Aborts a command with exit code 1."""


def _spec_path(args) -> str:
    return args.spec_file or args.spec or os.environ.get(SPEC_ENV) or str(bundled_spec_path())


def _load(args, check: bool = True):
    path = _spec_path(args)
    try:
        with open(path, encoding="utf-8") as fh:
            source = fh.read()
    except OSError as exc:
        raise _Failure(f"{path}: cannot read: {exc.strerror or exc}") from None
    try:
        spec = parse_document(source)
    except ParseError as exc:
        raise _Failure("\n".join(f"{path}:{d.line}: {d.severity}: {d.message}" for d in exc.diagnostics)) from None
    if check:
        errors = [d for d in validate(spec) if d.severity == ERROR]
        if errors:
            raise _Failure("\n".join(f"{path}:{d.line}: {d.severity}: {d.message}" for d in errors))
    return spec


def _assignments(parser: argparse.ArgumentParser, spec, pairs: list[str]) -> dict[str, float]:
    values: dict[str, float] = {}
    for pair in pairs or []:
        name, sep, raw = pair.partition("=")
        try:
            values[name.strip().lower()] = float(raw)
        except ValueError:
            sep = ""
        if not sep:
            parser.error(f"--set expects NAME=NUMBER, got {pair!r}")
    names = [v.name for v in spec.inputs]
    unknown = sorted(set(values) - set(names))
    if unknown:
        parser.error(f"unknown input(s): {', '.join(unknown)}")
    missing = [n for n in names if n not in values]
    if missing:
        parser.error("missing --set for input(s): " + ", ".join(missing))
    return values


def cmd_eval(args, parser) -> int:
    spec = _load(args)
    values = _assignments(parser, spec, args.set)
    decision = decide(spec, values, args.mode)
    out = spec.output
    unit = f" {out.unit}" if out.unit else ""
    print(f"{out.name} = {decision.wash_time:.2f}{unit} ({decision.dominant_term})")
    width = max(len(n) for n in out.term_names)
    for name, strength in decision.fired.strengths.items():
        print(f"  {name:<{width}}  {strength:.2f}")
    return 0


def _parse_grid(parser, text: str | None, count: int) -> list[int]:
    if text is None:
        return [101] * count
    try:
        sizes = [int(part) for part in text.lower().split("x")]
    except ValueError:
        parser.error(f"--grid expects NxM, got {text!r}")
    if len(sizes) != count or min(sizes) < 2:
        parser.error(f"--grid needs {count} sample counts, each >= 2")
    return sizes


def cmd_sweep(args, parser) -> int:
    spec = _load(args)
    inputs = spec.inputs
    sizes = _parse_grid(parser, args.grid, len(inputs))
    axes = [np.linspace(v.lo, v.hi, n) for v, n in zip(inputs, sizes)]
    header = [v.name for v in inputs] + [spec.output.name]
    try:
        fh = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    except OSError as exc:
        raise _Failure(f"{args.out}: cannot write: {exc.strerror or exc}") from None
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for point in itertools.product(*axes):
            values = {v.name: float(x) for v, x in zip(inputs, point)}
            result = decide(spec, values, args.mode).wash_time
            writer.writerow([f"{x:.6f}" for x in point] + [f"{result:.6f}"])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def cmd_check(args, parser) -> int:
    path = _spec_path(args)
    spec = _load(args, check=False)
    diags = validate(spec)
    for d in diags:
        stream = sys.stderr if d.severity == ERROR else sys.stdout
        print(f"{path}:{d.line}: {d.severity}: {d.message}", file=stream)
    errors = sum(d.severity == ERROR for d in diags)
    warnings = len(diags) - errors
    if errors:
        print(f"FAILED: {errors} errors, {warnings} warnings", file=sys.stderr)
        return 1
    print(f"OK: {len(spec.variables)} variables, {len(spec.rules)} rules, {warnings} warnings")
    return 0


def explain_lines(spec, values: dict[str, float]) -> list[str]:
    """One line per rule with positive strength, strongest first."""
    fuzzified = [fuzzify(v, values[v.name]) for v in spec.inputs]
    fired = []
    for index, rule in enumerate(spec.rules):
        strength = evaluate_rule(rule, fuzzified)
        if strength > 0:
            fired.append((strength, index, rule))
    if not fired:
        return ["no rules fired"]
    fired.sort(key=lambda item: (-item[0], item[1]))
    lines = []
    for strength, _, rule in fired:
        joiner = " & " if rule.connective == "and" else " | "
        terms = joiner.join(term for _, term in rule.antecedents)
        degrees = ", ".join(
            f"{var}={term}:{deg:.2f}" for (var, term), deg in zip(rule.antecedents, antecedent_degrees(rule, fuzzified))
        )
        lines.append(f"{terms} → {rule.consequent[1]} @ {strength:.2f}  [{degrees}]")
    return lines


def cmd_explain(args, parser) -> int:
    spec = _load(args)
    values = _assignments(parser, spec, args.set)
    for line in explain_lines(spec, values):
        print(line)
    return 0


def cmd_simulate(args, parser) -> int:
    spec = _load(args)
    if len(spec.inputs) != 2:
        raise _Failure("simulate needs a controller with exactly two inputs (dirtiness, saturation)")
    try:
        cal = SensorCalibration(args.opacity_fraction, args.pressure_min, args.pressure_max)
        load = LoadProfile(args.dirt, args.k, args.opacity_gain, args.pressure)
        rates = ResourceRates(
            agitation_power=args.power,
            fill_volume=args.fill_volume,
            clean_threshold=args.clean_threshold,
            max_reruns=args.max_reruns,
            probe_minutes=args.probe_minutes,
            dt=args.dt,
            fill_minutes=args.fill_minutes,
            drain_minutes=args.drain_minutes,
        )
        if args.baseline is not None and not args.baseline > 0:
            raise ValueError("--baseline must be positive")
    except ValueError as exc:
        parser.error(str(exc))

    reports: list[tuple[str, CycleReport]]
    if args.baseline is None:
        reports = [("flc", run_cycle(load, cal, args.mode, rates, spec))]
    else:
        comparison = compare_baseline(load, cal, args.baseline, args.mode, rates, spec)
        reports = [("flc", comparison.flc), ("baseline", comparison.baseline)]

    for label, report in reports:
        title = f"FLC cycle ({args.mode})" if label == "flc" else f"fixed-timer cycle ({args.baseline:g} min)"
        print(title)
        for line in report.lines():
            print(line)
    if args.baseline is not None:
        print("delta (FLC - baseline)")
        for name, value in comparison.deltas.items():
            print(f"  {name:<12} = {value:+.4f}")
    if args.csv:
        try:
            with open(args.csv, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(("cycle",) + CycleReport.CSV_COLUMNS)
                for label, report in reports:
                    writer.writerow([label] + report.csv_row())
        except OSError as exc:
            raise _Failure(f"{args.csv}: cannot write: {exc.strerror or exc}") from None
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("spec_file", nargs="?", help="controller file (.flc)")
    common.add_argument("--spec", help=f"controller file; defaults to ${SPEC_ENV} or the bundled one")
    common.add_argument("--mode", choices=MODES, default=CENTROID)

    parser = argparse.ArgumentParser(prog="fuzzctl", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="evaluate one input point")
    p.add_argument("--set", action="append", metavar="NAME=VALUE", help="input value (repeat per input)")
    p.set_defaults(func=cmd_eval, subparser=p)

    p = sub.add_parser("sweep", parents=[common], help="write the control surface as CSV")
    p.add_argument("--grid", metavar="NxM", help="samples per input (default 101 each)")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_sweep, subparser=p)

    p = sub.add_parser("check", parents=[common], help="validate a controller file")
    p.set_defaults(func=cmd_check, subparser=p)

    p = sub.add_parser("explain", parents=[common], help="list the rules fired at a point")
    p.add_argument("--set", action="append", metavar="NAME=VALUE")
    p.set_defaults(func=cmd_explain, subparser=p)

    defaults_load, cal, rates = DEFAULT_LOAD, SensorCalibration(), ResourceRates()
    p = sub.add_parser("simulate", parents=[common], help="simulate a wash cycle")
    p.add_argument("--dirt", type=float, default=defaults_load.initial_dirt, help="initial dirt, 0-30")
    p.add_argument("--k", type=float, default=defaults_load.k, help="dirt release rate per minute")
    p.add_argument("--opacity-gain", type=float, default=defaults_load.opacity_gain)
    p.add_argument("--pressure", type=float, help="idle-phase pressure counts (default: derived from --dirt)")
    p.add_argument("--baseline", type=float, metavar="MINUTES", help="also run a fixed-timer cycle")
    p.add_argument("--opacity-fraction", type=float, default=cal.opacity_asymptote_fraction)
    p.add_argument("--pressure-min", type=float, default=cal.pressure_min)
    p.add_argument("--pressure-max", type=float, default=cal.pressure_max)
    p.add_argument("--power", type=float, default=rates.agitation_power, help="agitation power, W")
    p.add_argument("--fill-volume", type=float, default=rates.fill_volume, help="litres per fill")
    p.add_argument("--clean-threshold", type=float, default=rates.clean_threshold)
    p.add_argument("--max-reruns", type=int, default=rates.max_reruns)
    p.add_argument("--probe-minutes", type=float, default=rates.probe_minutes)
    p.add_argument("--dt", type=float, default=rates.dt)
    p.add_argument("--fill-minutes", type=float, default=rates.fill_minutes)
    p.add_argument("--drain-minutes", type=float, default=rates.drain_minutes)
    p.add_argument("--csv", metavar="PATH", help="write the report(s) as CSV rows")
    p.set_defaults(func=cmd_simulate, subparser=p)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, args.subparser)
    except (_Failure, ConfigurationError) as exc:
        print(exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
