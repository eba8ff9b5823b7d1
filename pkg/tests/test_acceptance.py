"""Exit criteria for the package, one test per criterion.

Each test records a PASS/FAIL line shown in pytest's terminal summary.
"""

import io
import math
import pickle
import time
from contextlib import redirect_stdout

import numpy as np
import pytest
from hypothesis import given, settings

from conftest import ACCEPTANCE_LINES
from fuzzywash.cli import main
from fuzzywash.core import FuzzifiedInput, Rule, defuzzify_centroid, defuzzify_paper_range, evaluate_rule, fuzzify
from fuzzywash.dsl import ParseError, parse_document, serialize
from fuzzywash.simulator import DEFAULT_LOAD, LoadProfile, compare_baseline, run_cycle, step
from fuzzywash.simulator import CycleState
from fuzzywash.washctl import SensorCalibration, bundled_spec_path, wash_time
from oracles import centroid_oracle
from strategies import specs
from test_dsl import INVALID

SPEC = parse_document(bundled_spec_path().read_text(encoding="utf-8"))


def record(name, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_fig5_rule_strength():
    rule = Rule((("dirtiness", "medium"), ("saturation_time", "medium")), ("wash_time", "high"))
    inputs = [FuzzifiedInput("dirtiness", {"medium": 0.48}), FuzzifiedInput("saturation_time", {"medium": 0.57})]
    strength = evaluate_rule(rule, inputs)
    record("fig5 AND strength", strength == 0.48, f"min(0.48, 0.57) = {strength!r}")


def test_paper_arithmetic():
    value = defuzzify_paper_range(SPEC.output_ranges, {"high": 0.48})
    ok = math.isclose(value, 10.84, abs_tol=1e-12) and abs(value - 11) <= 0.5
    record("paper-mode wash time", ok, f"HIGH 7-15 at 0.48 -> {value:.4f} (reported 11, tol 0.5)")


TABLE_1 = {
    # (saturation row, dirtiness column) -> wash time
    (0, 0): "very_low", (0, 15): "low", (0, 30): "medium",
    (5, 0): "low", (5, 15): "medium", (5, 30): "high",
    (10, 0): "medium", (10, 15): "high", (10, 30): "very_high",
}


def test_table1_prototypes():
    matches = sum(wash_time(dirt, sat).dominant_term == cell for (sat, dirt), cell in TABLE_1.items())
    record("Table 1 apex pairs", matches == 9, f"{matches}/9 dominant terms match")


def test_table2_ranges():
    expected = {"very_low": (0, 4), "low": (0, 8), "medium": (4, 11), "high": (7, 15), "very_high": (11, 15)}
    got = SPEC.output_ranges
    record("Table 2 ranges", got == expected, f"RANGES block = {got}")


def test_partition_of_unity():
    worst = 0.0
    for var in SPEC.inputs:
        for x in np.linspace(var.lo, var.hi, 10001):
            worst = max(worst, abs(sum(fuzzify(var, x).degrees.values()) - 1.0))
    record("partition of unity", worst <= 1e-12, f"max |sum - 1| = {worst:.2e} over 2 x 10001 points (tol 1e-12)")


def test_centroid_against_oracle():
    out = SPEC.output
    shapes = [t.mf.corners for t in out.terms]
    rng = np.random.default_rng(20240611)
    start = time.perf_counter()
    worst, checked = 0.0, 0
    while checked < 1000:
        vec = rng.random(5) * (rng.random(5) < 0.7)
        if vec.max() == 0:
            continue
        got = defuzzify_centroid(out, dict(zip(out.term_names, vec)), samples=100_000)
        worst = max(worst, abs(got - centroid_oracle(shapes, vec, out.lo, out.hi)))
        checked += 1
    elapsed = time.perf_counter() - start
    record("centroid vs oracle", worst <= 1e-6 and elapsed < 5.0,
           f"max error {worst:.2e} over {checked} vectors (tol 1e-6), {elapsed:.2f}s (limit 5s)")


def test_surface_properties():
    start = time.perf_counter()
    dirt = np.linspace(0, 30, 301)
    sat = np.linspace(0, 10, 301)
    surface = np.array([[wash_time(d, s).wash_time for s in sat] for d in dirt])
    elapsed = time.perf_counter() - start
    in_range = surface.min() >= 0 and surface.max() <= 15
    along_dirt, along_sat = np.diff(surface, axis=0), np.diff(surface, axis=1)
    monotone = along_dirt.min() >= -1e-9 and along_sat.min() >= -1e-9
    jump = max(np.abs(along_dirt).max(), np.abs(along_sat).max())
    ok = in_range and monotone and jump < 0.5 and elapsed < 10.0
    record("surface 301x301", ok,
           f"range [{surface.min():.4f}, {surface.max():.4f}], min step {min(along_dirt.min(), along_sat.min()):.2e}, "
           f"max jump {jump:.4f}, {elapsed:.2f}s")


def test_parser_round_trip():
    seen = []

    @settings(max_examples=300, deadline=None, database=None, derandomize=True)
    @given(specs())
    def check(spec):
        seen.append(parse_document(serialize(spec)) == spec)

    check()
    numbered = 0
    for source, line, _ in INVALID:
        try:
            parse_document(source)
        except ParseError as exc:
            n = max(len(source.splitlines()), 1)
            numbered += any(d.line == line for d in exc.diagnostics) and all(1 <= d.line <= n for d in exc.diagnostics)
    ok = len(seen) >= 200 and all(seen) and numbered == len(INVALID)
    record("parser round trip", ok,
           f"{sum(seen)}/{len(seen)} random specs round-trip; {numbered}/{len(INVALID)} invalid fixtures line-numbered")


def test_simulator_conservation_and_determinism():
    loads = [DEFAULT_LOAD, LoadProfile(30, 0.01), LoadProfile(18, 0.2), LoadProfile(30, 2.0), LoadProfile(0, 0.5)]
    balance = 0.0
    for load in loads:
        for fill in run_cycle(load).fills:
            balance = max(balance, abs((fill.dirt_start - fill.dirt_end) - fill.water_dirt))
    load = LoadProfile(10, 0.37)
    fine = CycleState(residual_dirt=10)
    for _ in range(10):
        fine = step(fine, load, 0.1)
    compose = abs(fine.residual_dirt - step(CycleState(residual_dirt=10), load, 1.0).residual_dirt)
    identical = all(pickle.dumps(run_cycle(l)) == pickle.dumps(run_cycle(l)) for l in loads)
    outputs = []
    for _ in range(2):
        buf = io.StringIO()
        with redirect_stdout(buf):
            main(["simulate", "--dirt", "18", "--k", "0.2", "--baseline", "10"])
        outputs.append(buf.getvalue().encode())
    identical = identical and outputs[0] == outputs[1]
    ok = balance <= 1e-9 and compose <= 1e-12 and identical
    record("simulator conservation", ok,
           f"mass balance {balance:.1e} (tol 1e-9), composability {compose:.1e} (tol 1e-12), byte-identical={identical}")


def test_baseline_comparison():
    cmp = compare_baseline(DEFAULT_LOAD, SensorCalibration(), 15.0)
    shorter = cmp.flc.total_time < 15.0
    cleaner = cmp.flc.final_dirt <= cmp.baseline.final_dirt
    record("baseline comparison", shorter and cleaner,
           f"FLC {cmp.flc.total_time:.2f} min vs 15 min timer (shorter={shorter}); "
           f"final dirt FLC {cmp.flc.final_dirt:.3g} vs baseline {cmp.baseline.final_dirt:.3g} (FLC <= baseline: {cleaner})")
