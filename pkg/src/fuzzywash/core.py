"""Mamdani inference primitives.

Membership evaluation, fuzzification, rule firing (min/max), max aggregation
and defuzzification. Every type here is frozen and every function is pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

TRIANGULAR = "triangular"
TRAPEZOIDAL = "trapezoidal"
INPUT = "input"
OUTPUT = "output"
AND = "and"
OR = "or"

DEFAULT_SAMPLES = 1001


class ConfigurationError(ValueError):
    """A controller definition is inconsistent (unknown names, bad shapes...)."""


class NoRuleFired(ValueError):
    """Defuzzification was asked for with every output strength at zero."""


@dataclass(frozen=True)
class MembershipFunction:
    kind: str
    breakpoints: tuple[float, ...]

    def __post_init__(self) -> None:
        expected = {TRIANGULAR: 3, TRAPEZOIDAL: 4}.get(self.kind)
        if expected is None:
            raise ConfigurationError(f"unknown membership kind {self.kind!r}")
        pts = tuple(float(p) for p in self.breakpoints)
        if len(pts) != expected:
            raise ConfigurationError(f"{self.kind} needs {expected} breakpoints, got {len(pts)}")
        if not all(math.isfinite(p) for p in pts):
            raise ConfigurationError("breakpoints must be finite")
        if any(p > q for p, q in zip(pts, pts[1:])):
            raise ConfigurationError(f"breakpoints must be non-decreasing: {pts}")
        object.__setattr__(self, "breakpoints", pts)

    @classmethod
    def tri(cls, a: float, b: float, c: float) -> "MembershipFunction":
        return cls(TRIANGULAR, (a, b, c))

    @classmethod
    def trap(cls, a: float, b: float, c: float, d: float) -> "MembershipFunction":
        return cls(TRAPEZOIDAL, (a, b, c, d))

    @property
    def corners(self) -> tuple[float, float, float, float]:
        """Breakpoints as a trapezoid (a, b, c, d); a triangle has b == c."""
        if self.kind == TRIANGULAR:
            a, b, c = self.breakpoints
            return a, b, b, c
        return self.breakpoints  # type: ignore[return-value]

    @property
    def support(self) -> tuple[float, float]:
        return self.breakpoints[0], self.breakpoints[-1]

    def __call__(self, x: float) -> float:
        return membership(self, x)


def membership(mf: MembershipFunction, x: float) -> float:
    """Degree of ``x`` in ``mf``; zero outside the support, one on the plateau.

    Coincident breakpoints are shoulders: ``tri(0, 0, 15)`` is 1 at x=0.
    """
    a, b, c, d = mf.corners
    if x < a or x > d:
        return 0.0
    if b <= x <= c:
        return 1.0
    if x < b:
        return (x - a) / (b - a)
    return (d - x) / (d - c)


def membership_array(mf: MembershipFunction, xs: np.ndarray) -> np.ndarray:
    """Vectorised :func:`membership` with identical edge semantics."""
    a, b, c, d = mf.corners
    xs = np.asarray(xs, dtype=float)
    out = np.zeros_like(xs)
    if b > a:
        rising = (xs >= a) & (xs < b)
        out[rising] = (xs[rising] - a) / (b - a)
    out[(xs >= b) & (xs <= c)] = 1.0
    if d > c:
        falling = (xs > c) & (xs <= d)
        out[falling] = (d - xs[falling]) / (d - c)
    return out


@dataclass(frozen=True)
class Term:
    name: str
    mf: MembershipFunction


@dataclass(frozen=True)
class LinguisticVariable:
    """A universe ``[lo, hi]`` split into named terms.

    ``aliases`` maps extra names onto existing terms, e.g. ``("small", "low")``.
    Full coverage of the universe is not enforced here; ``validate`` in the DSL
    reports gaps as warnings.
    """

    name: str
    role: str
    lo: float
    hi: float
    terms: tuple[Term, ...]
    unit: str = ""
    aliases: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", tuple(self.terms))
        object.__setattr__(self, "aliases", tuple(tuple(a) for a in self.aliases))
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))
        if self.role not in (INPUT, OUTPUT):
            raise ConfigurationError(f"{self.name}: role must be input or output")
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or not self.lo < self.hi:
            raise ConfigurationError(f"{self.name}: universe needs lo < hi, got [{self.lo}, {self.hi}]")
        seen: set[str] = set()
        for term in self.terms:
            key = term.name.lower()
            if key in seen:
                raise ConfigurationError(f"{self.name}: duplicate term {term.name!r}")
            seen.add(key)
            lo, hi = term.mf.support
            if lo < self.lo or hi > self.hi:
                raise ConfigurationError(
                    f"{self.name}.{term.name}: breakpoints outside [{self.lo}, {self.hi}]"
                )
        for alias, target in self.aliases:
            if alias.lower() in seen:
                raise ConfigurationError(f"{self.name}: alias {alias!r} clashes with a term")
            if target.lower() not in {t.name.lower() for t in self.terms}:
                raise ConfigurationError(f"{self.name}: alias {alias!r} targets unknown term {target!r}")
            seen.add(alias.lower())

    @property
    def term_names(self) -> tuple[str, ...]:
        return tuple(t.name for t in self.terms)

    def resolve(self, name: str) -> str:
        """Canonical term name for ``name`` (a term or an alias)."""
        key = name.lower()
        for term in self.terms:
            if term.name.lower() == key:
                return term.name
        for alias, target in self.aliases:
            if alias.lower() == key:
                return self.resolve(target)
        raise ConfigurationError(f"unknown term {name!r} for variable {self.name!r}")

    def display_name(self, term: str) -> str:
        """The first alias of ``term`` if it has one, else the term name."""
        canonical = self.resolve(term)
        for alias, target in self.aliases:
            if self.resolve(target) == canonical:
                return alias
        return canonical

    def term(self, name: str) -> Term:
        canonical = self.resolve(name)
        return next(t for t in self.terms if t.name == canonical)

    def clamp(self, x: float) -> float:
        return min(max(x, self.lo), self.hi)


@dataclass(frozen=True)
class Rule:
    antecedents: tuple[tuple[str, str], ...]
    consequent: tuple[str, str]
    connective: str = AND

    def __post_init__(self) -> None:
        object.__setattr__(self, "antecedents", tuple(tuple(a) for a in self.antecedents))
        object.__setattr__(self, "consequent", tuple(self.consequent))
        if not self.antecedents:
            raise ConfigurationError("a rule needs at least one antecedent")
        if self.connective not in (AND, OR):
            raise ConfigurationError(f"connective must be and/or, got {self.connective!r}")


@dataclass(frozen=True)
class FuzzifiedInput:
    variable: str
    degrees: Mapping[str, float]
    aliases: Mapping[str, str] = field(default_factory=dict)

    def degree(self, term: str) -> float:
        if term in self.degrees:
            return self.degrees[term]
        key = term.lower()
        key = self.aliases.get(key, key)
        for name, value in self.degrees.items():
            if name.lower() == key:
                return value
        raise ConfigurationError(f"unknown term {term!r} for variable {self.variable!r}")


@dataclass(frozen=True)
class TermStrengths:
    variable: str
    strengths: Mapping[str, float]

    def dominant(self) -> str:
        """Strongest term; ties go to the later-declared term."""
        best = None
        for name, value in self.strengths.items():
            if best is None or value >= self.strengths[best]:
                best = name
        if best is None:
            raise NoRuleFired(f"no terms for {self.variable}")
        return best


@dataclass(frozen=True)
class RuleBase:
    """Ordered rules resolved against a set of variables (one output)."""

    variables: tuple[LinguisticVariable, ...]
    rules: tuple[Rule, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "rules", tuple(self.rules))
        outputs = [v for v in self.variables if v.role == OUTPUT]
        if len(outputs) != 1:
            raise ConfigurationError(f"expected exactly one output variable, got {len(outputs)}")
        for rule in self.rules:
            for var, term in rule.antecedents:
                v = self.variable(var)
                if v.role != INPUT:
                    raise ConfigurationError(f"{var!r} is not an input variable")
                v.resolve(term)
            var, term = rule.consequent
            v = self.variable(var)
            if v.role != OUTPUT:
                raise ConfigurationError(f"{var!r} is not an output variable")
            v.resolve(term)

    def variable(self, name: str) -> LinguisticVariable:
        for v in self.variables:
            if v.name.lower() == name.lower():
                return v
        raise ConfigurationError(f"unknown variable {name!r}")

    @property
    def inputs(self) -> tuple[LinguisticVariable, ...]:
        return tuple(v for v in self.variables if v.role == INPUT)

    @property
    def output(self) -> LinguisticVariable:
        return next(v for v in self.variables if v.role == OUTPUT)


def fuzzify(var: LinguisticVariable, x: float) -> FuzzifiedInput:
    """Per-term degrees of ``x`` after clamping it into the universe."""
    if var.role != INPUT:
        raise ConfigurationError(f"{var.name} is not an input variable")
    x = var.clamp(float(x))
    degrees = {t.name: membership(t.mf, x) for t in var.terms}
    aliases = {a.lower(): var.resolve(t).lower() for a, t in var.aliases}
    return FuzzifiedInput(var.name, degrees, aliases)


def _by_name(inputs: Iterable[FuzzifiedInput] | Mapping[str, FuzzifiedInput]) -> dict[str, FuzzifiedInput]:
    if isinstance(inputs, dict):
        inputs = inputs.values()
    return {f.variable.lower(): f for f in inputs}


def antecedent_degrees(rule: Rule, inputs, _table: dict | None = None) -> list[float]:
    table = _by_name(inputs) if _table is None else _table
    degrees = []
    for var, term in rule.antecedents:
        try:
            fuzzified = table[var.lower()]
        except KeyError:
            raise ConfigurationError(f"no fuzzified input for variable {var!r}") from None
        degrees.append(fuzzified.degree(term))
    return degrees


def evaluate_rule(rule: Rule, inputs, _table: dict | None = None) -> float:
    """Firing strength: min of antecedent degrees under AND, max under OR."""
    degrees = antecedent_degrees(rule, inputs, _table)
    return min(degrees) if rule.connective == AND else max(degrees)


def infer(rules: RuleBase, inputs) -> TermStrengths:
    """Fire every rule and max-aggregate strengths per consequent term."""
    if not rules.rules:
        raise ConfigurationError("rule base is empty")
    out = rules.output
    strengths = {name: 0.0 for name in out.term_names}
    table = _by_name(inputs)
    for rule in rules.rules:
        term = rule.consequent[1]
        if term not in strengths:
            term = out.resolve(term)
        strengths[term] = max(strengths[term], evaluate_rule(rule, inputs, table))
    return TermStrengths(out.name, strengths)


def _midpoint_grid(var: LinguisticVariable, samples: int) -> tuple[np.ndarray, np.ndarray]:
    cache = var.__dict__.setdefault("_grids", {})
    if samples not in cache:
        cache[samples] = _build_grid(var, samples)
    return cache[samples]


def _build_grid(var: LinguisticVariable, samples: int) -> tuple[np.ndarray, np.ndarray]:
    width = (var.hi - var.lo) / samples
    xs = var.lo + (np.arange(samples) + 0.5) * width
    table = np.vstack([membership_array(t.mf, xs) for t in var.terms])
    xs.setflags(write=False)
    table.setflags(write=False)
    return xs, table


def _strength_vector(var: LinguisticVariable, strengths: TermStrengths | Mapping[str, float]) -> np.ndarray:
    if isinstance(strengths, TermStrengths):
        strengths = strengths.strengths
    names = var.term_names
    if tuple(strengths) == names:
        return np.fromiter(strengths.values(), dtype=float, count=len(names))
    vec = np.zeros(len(names))
    for name, value in strengths.items():
        vec[names.index(var.resolve(name))] = value
    return vec


def defuzzify_centroid(
    var: LinguisticVariable,
    strengths: TermStrengths | Mapping[str, float],
    samples: int = DEFAULT_SAMPLES,
) -> float:
    """Centre of area of the clipped-and-maxed output set.

    Integrates with the midpoint rule over ``samples`` equal cells of the
    universe.
    """
    if samples < 1:
        raise ValueError("samples must be a positive integer")
    vec = _strength_vector(var, strengths)
    if not np.any(vec > 0):
        raise NoRuleFired(f"every strength for {var.name} is zero")
    xs, table = _midpoint_grid(var, int(samples))
    mu = np.minimum(table, vec[:, None]).max(axis=0)
    area = mu.sum()
    if area <= 0:
        raise NoRuleFired(f"fired terms of {var.name} have zero area")
    value = float(np.dot(xs, mu) / area)
    return min(max(value, var.lo), var.hi)


def select_paper_term(
    ranges: Mapping[str, Sequence[float]], strengths: TermStrengths | Mapping[str, float]
) -> str:
    """Strongest term; ties broken towards the larger range midpoint."""
    if isinstance(strengths, TermStrengths):
        strengths = strengths.strengths
    fired = {name: s for name, s in strengths.items() if s > 0}
    if not fired:
        raise NoRuleFired("every strength is zero")
    missing = [name for name in fired if name not in ranges]
    if missing:
        raise ConfigurationError(f"no physical range declared for {', '.join(missing)}")

    def key(name: str) -> tuple[float, float]:
        lo, hi = ranges[name]
        return fired[name], (lo + hi) / 2

    return max(fired, key=key)


def defuzzify_paper_range(
    ranges: Mapping[str, Sequence[float]], strengths: TermStrengths | Mapping[str, float]
) -> float:
    """Scale the strongest term's physical range by its strength.

    ``range_min + strength * (range_max - range_min)``; with HIGH = 7-15
    minutes fired at 0.48 this gives 10.84.
    """
    if isinstance(strengths, TermStrengths):
        strengths = strengths.strengths
    term = select_paper_term(ranges, strengths)
    lo, hi = ranges[term]
    return lo + strengths[term] * (hi - lo)
