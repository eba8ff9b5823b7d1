"""The two-input washing-machine controller and its sensor scaling."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Mapping, Sequence

from .core import (
    AND,
    DEFAULT_SAMPLES,
    INPUT,
    OUTPUT,
    LinguisticVariable,
    MembershipFunction,
    Rule,
    Term,
    TermStrengths,
    defuzzify_centroid,
    defuzzify_paper_range,
    fuzzify,
    infer,
    select_paper_term,
)
from .dsl import ControllerSpec

CENTROID = "centroid"
PAPER = "paper"
MODES = (CENTROID, PAPER)

DIRTINESS_MAX = 30.0
SATURATION_MAX = 10.0

tri = MembershipFunction.tri

# rows: saturation small/medium/large, columns: dirtiness low/medium/high
RULE_TABLE = {
    "small": {"low": "very_low", "medium": "low", "high": "medium"},
    "medium": {"low": "low", "medium": "medium", "high": "high"},
    "large": {"low": "medium", "medium": "high", "high": "very_high"},
}

PHYSICAL_RANGES = {
    "very_low": (0.0, 4.0),
    "low": (0.0, 8.0),
    "medium": (4.0, 11.0),
    "high": (7.0, 15.0),
    "very_high": (11.0, 15.0),
}


def build_washing_controller() -> ControllerSpec:
    dirtiness = LinguisticVariable(
        "dirtiness",
        INPUT,
        0,
        DIRTINESS_MAX,
        (Term("low", tri(0, 0, 15)), Term("medium", tri(0, 15, 30)), Term("high", tri(15, 30, 30))),
    )
    saturation = LinguisticVariable(
        "saturation_time",
        INPUT,
        0,
        SATURATION_MAX,
        (Term("low", tri(0, 0, 5)), Term("medium", tri(0, 5, 10)), Term("high", tri(5, 10, 10))),
        unit="min",
        aliases=(("small", "low"), ("large", "high")),
    )
    wash = LinguisticVariable(
        "wash_time",
        OUTPUT,
        0,
        15,
        (
            Term("very_low", tri(0, 0, 4)),
            Term("low", tri(0, 4, 8)),
            Term("medium", tri(4, 7.5, 11)),
            Term("high", tri(7, 11, 15)),
            Term("very_high", tri(11, 15, 15)),
        ),
        unit="min",
    )
    rules = tuple(
        Rule((("dirtiness", dirt), ("saturation_time", sat)), ("wash_time", out), AND)
        for sat, row in RULE_TABLE.items()
        for dirt, out in row.items()
    )
    return ControllerSpec("washing_machine", (dirtiness, saturation, wash), rules, dict(PHYSICAL_RANGES))


def bundled_spec_path():
    """Path of the shipped ``washing_machine.flc``."""
    return resources.files("fuzzywash") / "data" / "washing_machine.flc"


@lru_cache(maxsize=1)
def washing_controller() -> ControllerSpec:
    return build_washing_controller()


@dataclass(frozen=True)
class WashDecision:
    wash_time: float
    fired: TermStrengths
    dominant_term: str
    mode: str


def decide(
    spec: ControllerSpec,
    values: Mapping[str, float],
    mode: str = CENTROID,
    samples: int = DEFAULT_SAMPLES,
) -> WashDecision:
    """Fuzzify ``values`` (keyed by input name), infer and defuzzify."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    lowered = {k.lower(): v for k, v in values.items()}
    missing = [v.name for v in spec.inputs if v.name not in lowered]
    if missing:
        raise ValueError(f"missing input values for {', '.join(missing)}")
    fuzzified = [fuzzify(v, lowered[v.name]) for v in spec.inputs]
    fired = infer(spec.rulebase, fuzzified)
    if mode == PAPER:
        if spec.output_ranges is None:
            raise ValueError("paper mode needs a RANGES block")
        value = defuzzify_paper_range(spec.output_ranges, fired)
        dominant = select_paper_term(spec.output_ranges, fired)
    else:
        value = defuzzify_centroid(spec.output, fired, samples)
        dominant = fired.dominant()
    return WashDecision(value, fired, dominant, mode)


def wash_time(dirtiness: float, saturation: float, mode: str = CENTROID) -> WashDecision:
    return decide(washing_controller(), {"dirtiness": dirtiness, "saturation_time": saturation}, mode)


@dataclass(frozen=True)
class SensorCalibration:
    """Linear pressure scaling and the opacity threshold defining saturation."""

    opacity_asymptote_fraction: float = 0.95
    pressure_min: float = 0.0
    pressure_max: float = 1023.0

    def __post_init__(self) -> None:
        if not 0 < self.opacity_asymptote_fraction < 1:
            raise ValueError("opacity_asymptote_fraction must lie in (0, 1)")
        if not self.pressure_min < self.pressure_max:
            raise ValueError("pressure_min must be below pressure_max")


def pressure_to_dirtiness(counts: float, cal: SensorCalibration = SensorCalibration()) -> float:
    span = cal.pressure_max - cal.pressure_min
    fraction = min(max((counts - cal.pressure_min) / span, 0.0), 1.0)
    return fraction * DIRTINESS_MAX


def dirtiness_to_pressure(dirtiness: float, cal: SensorCalibration = SensorCalibration()) -> float:
    """Inverse of :func:`pressure_to_dirtiness`, used by the simulator's sensor."""
    fraction = min(max(dirtiness / DIRTINESS_MAX, 0.0), 1.0)
    return cal.pressure_min + fraction * (cal.pressure_max - cal.pressure_min)


def opacity_to_saturation(
    series: Sequence[tuple[float, float]], cal: SensorCalibration = SensorCalibration()
) -> float:
    """Minutes until opacity first reaches the threshold fraction of its final value.

    The crossing is linearly interpolated between samples and clamped to
    ``[0, 10]``. A series whose final opacity is zero never saturates and
    returns 10.
    """
    if not series:
        raise ValueError("opacity series is empty")
    times = [float(t) for t, _ in series]
    if any(not math.isfinite(t) for t in times) or any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("opacity series times must be finite and strictly increasing")
    final = series[-1][1]
    if final <= 0:
        return SATURATION_MAX
    threshold = cal.opacity_asymptote_fraction * final
    prev_t, prev_o = series[0]
    if prev_o >= threshold:
        return min(max(prev_t, 0.0), SATURATION_MAX)
    for t, o in series[1:]:
        if o >= threshold:
            crossing = prev_t + (threshold - prev_o) / (o - prev_o) * (t - prev_t)
            return min(max(crossing, 0.0), SATURATION_MAX)
        prev_t, prev_o = t, o
    return SATURATION_MAX
