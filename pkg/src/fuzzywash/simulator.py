"""Closed-loop wash-cycle simulation around the washing controller.

Dirt leaves the clothes as ``d(t) = d0 * exp(-k t)`` and darkens the water in
proportion to the amount released. Each fill goes through sensing (pressure
reading plus a short probe agitation that yields an opacity series), a wash
of the controller's chosen length and a drain. Loads still dirtier than the
clean threshold are refilled and re-run, up to ``max_reruns`` times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .dsl import ControllerSpec
from .washctl import (
    CENTROID,
    DIRTINESS_MAX,
    SensorCalibration,
    decide,
    dirtiness_to_pressure,
    opacity_to_saturation,
    pressure_to_dirtiness,
    washing_controller,
)


@dataclass(frozen=True)
class LoadProfile:
    initial_dirt: float
    k: float
    opacity_gain: float = 1.0 / DIRTINESS_MAX
    pressure_reading: float | None = None

    def __post_init__(self) -> None:
        if not 0 <= self.initial_dirt <= DIRTINESS_MAX:
            raise ValueError(f"initial_dirt must lie in [0, {DIRTINESS_MAX:g}]")
        if not (self.k > 0 and math.isfinite(self.k)):
            raise ValueError("dirt release rate k must be positive")
        if not (self.opacity_gain > 0 and math.isfinite(self.opacity_gain)):
            raise ValueError("opacity_gain must be positive")

    def pressure(self, cal: SensorCalibration) -> float:
        """Sensor counts for the idle phase; derived from the dirt when unset."""
        if self.pressure_reading is not None:
            return self.pressure_reading
        return dirtiness_to_pressure(self.initial_dirt, cal)


DEFAULT_LOAD = LoadProfile(initial_dirt=5.0, k=0.7)  # lightly soiled


@dataclass(frozen=True)
class ResourceRates:
    agitation_power: float = 500.0  # W
    fill_volume: float = 40.0  # L
    clean_threshold: float = 1.0
    max_reruns: int = 3
    probe_minutes: float = 3.0
    dt: float = 0.05
    fill_minutes: float = 1.0
    drain_minutes: float = 1.0

    def __post_init__(self) -> None:
        for name in ("agitation_power", "fill_volume", "probe_minutes", "dt"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be positive")
        for name in ("clean_threshold", "fill_minutes", "drain_minutes"):
            value = getattr(self, name)
            if not (value >= 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be non-negative")
        if self.max_reruns < 0:
            raise ValueError("max_reruns must be non-negative")


@dataclass(frozen=True)
class CycleState:
    residual_dirt: float
    water_opacity: float = 0.0
    elapsed: float = 0.0
    water_used: float = 0.0
    energy_used: float = 0.0
    reruns: int = 0
    water_dirt: float = 0.0  # dirt suspended in the current fill


def step(state: CycleState, load: LoadProfile, dt: float, power: float = 500.0) -> CycleState:
    """Agitate for ``dt`` minutes."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    remaining = state.residual_dirt * math.exp(-load.k * dt)
    water_dirt = state.water_dirt + (state.residual_dirt - remaining)
    return replace(
        state,
        residual_dirt=remaining,
        water_dirt=water_dirt,
        water_opacity=min(1.0, load.opacity_gain * water_dirt),
        elapsed=state.elapsed + dt,
        energy_used=state.energy_used + power * dt / 60.0,
    )


@dataclass(frozen=True)
class Phase:
    name: str  # fill | sense | wash | drain
    fill: int
    minutes: float
    water: float
    energy: float
    dirt_before: float
    dirt_after: float


@dataclass(frozen=True)
class FillRecord:
    """Dirt accounting for one water fill (mass balance)."""

    dirt_start: float
    dirt_end: float
    water_dirt: float
    saturation: float
    dirtiness: float
    wash_minutes: float


@dataclass(frozen=True)
class CycleReport:
    total_time: float
    total_water: float
    total_energy: float
    final_dirt: float
    reruns: int
    clean: bool
    phases: tuple[Phase, ...] = field(repr=False)
    fills: tuple[FillRecord, ...] = field(repr=False)

    CSV_COLUMNS = ("total_time", "total_water", "total_energy", "final_dirt", "reruns")

    def csv_row(self) -> list[str]:
        return [f"{self.total_time:.6f}", f"{self.total_water:.6f}", f"{self.total_energy:.6f}",
                f"{self.final_dirt:.6f}", str(self.reruns)]

    def lines(self) -> list[str]:
        out = [f"  {'phase':<6} {'fill':>4} {'minutes':>8} {'water_L':>8} {'energy_Wh':>10} {'dirt':>8}"]
        for p in self.phases:
            out.append(f"  {p.name:<6} {p.fill:>4} {p.minutes:>8.2f} {p.water:>8.2f} {p.energy:>10.2f} {p.dirt_after:>8.4f}")
        out += [
            f"  total_time   = {self.total_time:.2f} min",
            f"  total_water  = {self.total_water:.2f} L",
            f"  total_energy = {self.total_energy:.2f} Wh",
            f"  final_dirt   = {self.final_dirt:.4f}",
            f"  reruns       = {self.reruns}",
            f"  status       = {'clean' if self.clean else 'not clean'}",
        ]
        return out


def _agitate(state: CycleState, load: LoadProfile, minutes: float, rates: ResourceRates,
             series: list | None = None) -> CycleState:
    """Step through ``minutes`` at ``rates.dt``, finishing with a partial step."""
    whole = int(math.floor(minutes / rates.dt + 1e-9))
    start = state.elapsed
    for i in range(whole):
        state = step(state, load, rates.dt, rates.agitation_power)
        if series is not None:
            series.append(((i + 1) * rates.dt, state.water_opacity))
    rest = minutes - whole * rates.dt
    if rest > 1e-12:
        state = step(state, load, rest, rates.agitation_power)
        if series is not None:
            series.append((minutes, state.water_opacity))
    return replace(state, elapsed=start + minutes)


class _Cycle:
    def __init__(self, load: LoadProfile, rates: ResourceRates):
        self.load = load
        self.rates = rates
        self.state = CycleState(residual_dirt=load.initial_dirt)
        self.phases: list[Phase] = []
        self.fills: list[FillRecord] = []
        self.fill_no = 0

    def record(self, name: str, before: CycleState, water: float = 0.0) -> None:
        self.phases.append(Phase(
            name, self.fill_no, self.state.elapsed - before.elapsed, water,
            self.state.energy_used - before.energy_used, before.residual_dirt, self.state.residual_dirt,
        ))

    def fill(self) -> None:
        before = self.state
        self.fill_no += 1
        self.state = replace(
            self.state,
            water_dirt=0.0,
            water_opacity=0.0,
            water_used=self.state.water_used + self.rates.fill_volume,
            elapsed=self.state.elapsed + self.rates.fill_minutes,
        )
        self.record("fill", before, self.rates.fill_volume)

    def sense(self, pressure: float, cal: SensorCalibration) -> tuple[float, float]:
        before = self.state
        series = [(0.0, self.state.water_opacity)]
        self.state = _agitate(self.state, self.load, self.rates.probe_minutes, self.rates, series)
        self.record("sense", before)
        return pressure_to_dirtiness(pressure, cal), opacity_to_saturation(series, cal)

    def wash(self, minutes: float) -> None:
        before = self.state
        if minutes > 0:
            self.state = _agitate(self.state, self.load, minutes, self.rates)
        self.record("wash", before)

    def drain(self) -> None:
        before = self.state
        self.state = replace(self.state, elapsed=self.state.elapsed + self.rates.drain_minutes)
        self.record("drain", before)

    def run_fill(self, pressure: float, cal: SensorCalibration, choose) -> None:
        self.fill()
        start = self.state.residual_dirt
        dirtiness, saturation = self.sense(pressure, cal)
        minutes = choose(dirtiness, saturation)
        self.wash(minutes)
        self.fills.append(FillRecord(start, self.state.residual_dirt, self.state.water_dirt,
                                     saturation, dirtiness, minutes))
        self.drain()

    def report(self) -> CycleReport:
        s = self.state
        clean = s.residual_dirt <= self.rates.clean_threshold
        return CycleReport(
            total_time=sum(p.minutes for p in self.phases),
            total_water=len(self.fills) * self.rates.fill_volume,
            total_energy=sum(p.energy for p in self.phases),
            final_dirt=s.residual_dirt,
            reruns=s.reruns,
            clean=clean,
            phases=tuple(self.phases),
            fills=tuple(self.fills),
        )


def run_cycle(
    load: LoadProfile,
    cal: SensorCalibration = SensorCalibration(),
    mode: str = CENTROID,
    rates: ResourceRates = ResourceRates(),
    spec: ControllerSpec | None = None,
) -> CycleReport:
    """Sense, wash for the controller's decision, and re-run while still dirty."""
    spec = spec or washing_controller()

    def choose(dirtiness: float, saturation: float) -> float:
        values = {spec.inputs[0].name: dirtiness, spec.inputs[1].name: saturation}
        return decide(spec, values, mode).wash_time

    cycle = _Cycle(load, rates)
    cycle.run_fill(load.pressure(cal), cal, choose)
    while cycle.state.residual_dirt > rates.clean_threshold and cycle.state.reruns < rates.max_reruns:
        cycle.state = replace(cycle.state, reruns=cycle.state.reruns + 1)
        cycle.run_fill(dirtiness_to_pressure(cycle.state.residual_dirt, cal), cal, choose)
    return cycle.report()


def run_fixed(
    load: LoadProfile,
    minutes: float,
    cal: SensorCalibration = SensorCalibration(),
    rates: ResourceRates = ResourceRates(),
) -> CycleReport:
    """A timer machine: the same fill/sense/drain phases, one wash of ``minutes``."""
    if not minutes > 0:
        raise ValueError("fixed wash time must be positive")
    cycle = _Cycle(load, rates)
    cycle.run_fill(load.pressure(cal), cal, lambda dirtiness, saturation: minutes)
    return cycle.report()


@dataclass(frozen=True)
class BaselineComparison:
    flc: CycleReport
    baseline: CycleReport

    @property
    def deltas(self) -> dict[str, float]:
        """FLC minus baseline for each CSV column."""
        return {name: getattr(self.flc, name) - getattr(self.baseline, name) for name in CycleReport.CSV_COLUMNS}


def compare_baseline(
    load: LoadProfile,
    cal: SensorCalibration = SensorCalibration(),
    fixed_minutes: float = 15.0,
    mode: str = CENTROID,
    rates: ResourceRates = ResourceRates(),
    spec: ControllerSpec | None = None,
) -> BaselineComparison:
    return BaselineComparison(
        run_cycle(load, cal, mode, rates, spec),
        run_fixed(load, fixed_minutes, cal, rates),
    )
