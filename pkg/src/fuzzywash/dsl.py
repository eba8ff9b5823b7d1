"""The ``.flc`` controller-definition language.

    CONTROLLER <name>
    VAR (INPUT|OUTPUT) <name> RANGE <lo> <hi> [UNIT <label>]
      TERM <name> (TRI a b c | TRAP a b c d)
      ALIAS <name> = <term>
    RANGES <output-var>
      <term> <min> <max>
    RULE IF <var> IS <term> (AND|OR <var> IS <term>)* THEN <var> IS <term>

Keywords and identifiers are case-insensitive; identifiers are stored lower
case. ``#`` starts a comment.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .core import (
    AND,
    INPUT,
    OR,
    OUTPUT,
    ConfigurationError,
    LinguisticVariable,
    MembershipFunction,
    Rule,
    RuleBase,
    Term,
    membership_array,
)

KEYWORDS = frozenset(
    "controller var input output range unit term tri trap alias ranges rule if is and or then".split()
)
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_NUMBER = re.compile(r"[+-]?(\d+(\.\d*)?|\.\d+)\Z")

ERROR = "error"
WARNING = "warning"
COVERAGE_POINTS = 1001


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    line: int
    message: str

    def __str__(self) -> str:
        return f"line {self.line}: {self.severity}: {self.message}"


class ParseError(ValueError):
    """Raised by :func:`parse_document`; carries every error found."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("\n".join(str(d) for d in diagnostics))


@dataclass(frozen=True)
class ControllerSpec:
    name: str
    variables: tuple[LinguisticVariable, ...]
    rules: tuple[Rule, ...]
    output_ranges: Mapping[str, tuple[float, float]] | None = None
    # ("controller",) / ("var", name) / ("rule", index) -> source line
    lines: Mapping[tuple, int] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "rules", tuple(self.rules))
        if self.output_ranges is not None:
            object.__setattr__(
                self,
                "output_ranges",
                {k: (float(lo), float(hi)) for k, (lo, hi) in self.output_ranges.items()},
            )
        rulebase = RuleBase(self.variables, self.rules)
        if self.output_ranges is not None:
            out = rulebase.output
            missing = [t for t in out.term_names if t not in self.output_ranges]
            if missing:
                raise ConfigurationError(f"RANGES misses output terms: {', '.join(missing)}")
            for term in self.output_ranges:
                out.resolve(term)
        object.__setattr__(self, "_rulebase", rulebase)

    @property
    def rulebase(self) -> RuleBase:
        return self._rulebase  # type: ignore[attr-defined]

    @property
    def inputs(self) -> tuple[LinguisticVariable, ...]:
        return self.rulebase.inputs

    @property
    def output(self) -> LinguisticVariable:
        return self.rulebase.output

    def variable(self, name: str) -> LinguisticVariable:
        return self.rulebase.variable(name)


# --------------------------------------------------------------------------
# parsing


@dataclass
class _VarDraft:
    line: int
    role: str
    name: str
    lo: float
    hi: float
    unit: str = ""
    terms: list = field(default_factory=list)  # (line, name, kind, points)
    aliases: list = field(default_factory=list)  # (line, alias, target)


@dataclass
class _RuleDraft:
    line: int
    antecedents: list
    connective: str
    consequent: tuple


class _Parser:
    def __init__(self, source: str):
        self.lines = source.splitlines()
        self.diags: list[Diagnostic] = []
        self.name: str | None = None
        self.name_line = 1
        self.variables: list[_VarDraft] = []
        self.rules: list[_RuleDraft] = []
        self.ranges_var: tuple[int, str] | None = None
        self.ranges: list[tuple[int, str, float, float]] = []
        self.block: str | None = None  # "var" | "ranges" | None

    def error(self, line: int, message: str) -> None:
        self.diags.append(Diagnostic(ERROR, line, message))

    def ident(self, token: str, line: int, what: str) -> str | None:
        if not _IDENT.match(token):
            self.error(line, f"invalid {what} name {token!r}")
            return None
        if token.lower() in KEYWORDS:
            self.error(line, f"keyword {token!r} cannot be used as a {what} name")
            return None
        return token.lower()

    def number(self, token: str, line: int) -> float | None:
        if not _NUMBER.match(token):
            self.error(line, f"expected a number, got {token!r}")
            return None
        return float(token)

    def run(self) -> None:
        for lineno, raw in enumerate(self.lines, start=1):
            text = raw.split("#", 1)[0].replace("=", " = ")
            tokens = text.split()
            if tokens:
                self.statement(lineno, tokens)

    def statement(self, line: int, tokens: list[str]) -> None:
        head = tokens[0].lower()
        if head not in KEYWORDS and self.block == "ranges":
            self.range_entry(line, tokens)
            return
        handler = {
            "controller": self.controller,
            "var": self.var,
            "term": self.term,
            "alias": self.alias,
            "ranges": self.ranges_header,
            "rule": self.rule,
        }.get(head)
        if handler is None:
            self.error(line, f"syntax error: unexpected {tokens[0]!r}")
            return
        handler(line, tokens[1:])

    def controller(self, line: int, args: list[str]) -> None:
        self.block = None
        if len(args) != 1:
            self.error(line, "syntax error: expected CONTROLLER <name>")
            return
        if self.name is not None:
            self.error(line, "duplicate CONTROLLER declaration")
            return
        name = self.ident(args[0], line, "controller")
        if name:
            self.name, self.name_line = name, line

    def var(self, line: int, args: list[str]) -> None:
        self.block = None
        if not (len(args) in (5, 7) and args[2].lower() == "range"):
            self.error(line, "syntax error: expected VAR (INPUT|OUTPUT) <name> RANGE <lo> <hi> [UNIT <label>]")
            return
        role = args[0].lower()
        if role not in (INPUT, OUTPUT):
            self.error(line, f"syntax error: expected INPUT or OUTPUT, got {args[0]!r}")
            return
        if len(args) == 7 and args[5].lower() != "unit":
            self.error(line, f"syntax error: expected UNIT, got {args[5]!r}")
            return
        name = self.ident(args[1], line, "variable")
        lo, hi = self.number(args[3], line), self.number(args[4], line)
        if name is None or lo is None or hi is None:
            return
        if any(v.name == name for v in self.variables):
            self.error(line, f"duplicate declaration of variable {name!r}")
            return
        if not lo < hi:
            self.error(line, f"empty universe: RANGE {args[3]} {args[4]} needs lo < hi")
        draft = _VarDraft(line, role, name, lo, hi, args[6] if len(args) == 7 else "")
        self.variables.append(draft)
        self.block = "var"

    def current_var(self, line: int, keyword: str) -> _VarDraft | None:
        if self.block != "var":
            self.error(line, f"{keyword} outside a VAR block")
            return None
        return self.variables[-1]

    def term(self, line: int, args: list[str]) -> None:
        var = self.current_var(line, "TERM")
        if var is None:
            return
        arity = {"tri": 3, "trap": 4}
        if len(args) < 2 or args[1].lower() not in arity or len(args) != 2 + arity[args[1].lower()]:
            self.error(line, "syntax error: expected TERM <name> (TRI a b c | TRAP a b c d)")
            return
        name = self.ident(args[0], line, "term")
        points = [self.number(tok, line) for tok in args[2:]]
        if name is None or None in points:
            return
        if name in self._names(var):
            self.error(line, f"duplicate declaration of term {name!r} in {var.name!r}")
            return
        if any(p > q for p, q in zip(points, points[1:])):
            self.error(line, f"non-monotone breakpoints for term {name!r}: {' '.join(args[2:])}")
            return
        if points[0] < var.lo or points[-1] > var.hi:
            self.error(line, f"breakpoints of term {name!r} lie outside RANGE {_num(var.lo)} {_num(var.hi)}")
            return
        kind = "triangular" if args[1].lower() == "tri" else "trapezoidal"
        var.terms.append((line, name, kind, tuple(points)))

    def alias(self, line: int, args: list[str]) -> None:
        var = self.current_var(line, "ALIAS")
        if var is None:
            return
        if len(args) != 3 or args[1] != "=":
            self.error(line, "syntax error: expected ALIAS <name> = <term>")
            return
        alias = self.ident(args[0], line, "alias")
        target = self.ident(args[2], line, "term")
        if alias is None or target is None:
            return
        if alias in self._names(var):
            self.error(line, f"duplicate declaration of {alias!r} in {var.name!r}")
            return
        if target not in [t[1] for t in var.terms]:
            self.error(line, f"unknown term {target!r} in ALIAS for {var.name!r}")
            return
        var.aliases.append((line, alias, target))

    @staticmethod
    def _names(var: _VarDraft) -> set[str]:
        return {t[1] for t in var.terms} | {a[1] for a in var.aliases}

    def ranges_header(self, line: int, args: list[str]) -> None:
        self.block = None
        if len(args) != 1:
            self.error(line, "syntax error: expected RANGES <output-var>")
            return
        if self.ranges_var is not None:
            self.error(line, "duplicate RANGES block")
            return
        name = self.ident(args[0], line, "variable")
        if name:
            self.ranges_var = (line, name)
            self.block = "ranges"

    def range_entry(self, line: int, tokens: list[str]) -> None:
        if len(tokens) != 3:
            self.error(line, "syntax error: expected <term> <min> <max>")
            return
        term = self.ident(tokens[0], line, "term")
        lo, hi = self.number(tokens[1], line), self.number(tokens[2], line)
        if term is None or lo is None or hi is None:
            return
        if lo > hi:
            self.error(line, f"range for {term!r} has min > max")
            return
        self.ranges.append((line, term, lo, hi))

    def rule(self, line: int, args: list[str]) -> None:
        self.block = None
        usage = "syntax error: expected RULE IF <var> IS <term> (AND|OR <var> IS <term>)* THEN <var> IS <term>"
        low = [a.lower() for a in args]
        if not low or low[0] != "if" or "then" not in low:
            self.error(line, usage)
            return
        then = low.index("then")
        head, tail = args[1:then], args[then + 1 :]
        if len(tail) != 3 or tail[1].lower() != "is" or len(head) < 3 or (len(head) - 3) % 4:
            self.error(line, usage)
            return
        clauses, connectives = [], set()
        for i in range(0, len(head), 4):
            if i:
                connectives.add(head[i - 1].lower())
            var, is_, term = head[i : i + 3]
            if is_.lower() != "is":
                self.error(line, usage)
                return
            clauses.append((var, term))
        if not connectives <= {AND, OR}:
            self.error(line, usage)
            return
        if len(connectives) > 1:
            self.error(line, "mixed AND/OR in one rule is not allowed")
            return
        names = [self.ident(tok, line, "identifier") for pair in clauses for tok in pair]
        consequent = (self.ident(tail[0], line, "variable"), self.ident(tail[2], line, "term"))
        if None in names or None in consequent:
            return
        antecedents = list(zip(names[0::2], names[1::2]))
        self.rules.append(_RuleDraft(line, antecedents, connectives.pop() if connectives else AND, consequent))

    # -- resolution ------------------------------------------------------

    def resolve(self) -> ControllerSpec | None:
        if self.name is None:
            self.error(1, "missing CONTROLLER declaration")
        by_name = {v.name: v for v in self.variables}
        outputs = [v for v in self.variables if v.role == OUTPUT]
        if not outputs:
            self.error(self.name_line, "no OUTPUT variable declared")
        for extra in outputs[1:]:
            self.error(extra.line, f"more than one OUTPUT variable ({extra.name!r})")
        if not any(v.role == INPUT for v in self.variables):
            self.error(self.name_line, "no INPUT variable declared")

        def lookup(var: str, term: str, line: int, role: str) -> None:
            draft = by_name.get(var)
            if draft is None:
                self.error(line, f"unknown variable {var!r}")
            elif draft.role != role:
                self.error(line, f"variable {var!r} is not an {role} variable")
            elif term not in self._names(draft):
                self.error(line, f"unknown term {term!r} for variable {var!r}")

        for rule in self.rules:
            for var, term in rule.antecedents:
                lookup(var, term, rule.line, INPUT)
            lookup(*rule.consequent, rule.line, OUTPUT)

        ranges = None
        if self.ranges_var is not None:
            line, var = self.ranges_var
            draft = by_name.get(var)
            if draft is None:
                self.error(line, f"unknown variable {var!r}")
            elif draft.role != OUTPUT:
                self.error(line, f"RANGES must name the output variable, not {var!r}")
            else:
                ranges = {}
                for eline, term, lo, hi in self.ranges:
                    if term not in self._names(draft):
                        self.error(eline, f"unknown term {term!r} for variable {var!r}")
                        continue
                    canonical = dict((a[1], a[2]) for a in draft.aliases).get(term, term)
                    if canonical in ranges:
                        self.error(eline, f"duplicate range for term {canonical!r}")
                        continue
                    ranges[canonical] = (lo, hi)
                for _, term, _, _ in draft.terms:
                    if term not in ranges:
                        self.error(line, f"RANGES misses output term {term!r}")

        if self.diags:
            return None
        variables = tuple(
            LinguisticVariable(
                v.name,
                v.role,
                v.lo,
                v.hi,
                tuple(Term(name, MembershipFunction(kind, pts)) for _, name, kind, pts in v.terms),
                unit=v.unit,
                aliases=tuple((alias, target) for _, alias, target in v.aliases),
            )
            for v in self.variables
        )
        rules = tuple(Rule(tuple(r.antecedents), r.consequent, r.connective) for r in self.rules)
        lines: dict[tuple, int] = {("controller",): self.name_line}
        lines.update({("var", v.name): v.line for v in self.variables})
        lines.update({("rule", i): r.line for i, r in enumerate(self.rules)})
        return ControllerSpec(self.name, variables, rules, ranges, lines)


def parse_document(source: str) -> ControllerSpec:
    """Parse ``.flc`` text into a resolved :class:`ControllerSpec`.

    Raises :class:`ParseError` listing every error with its line number.
    """
    parser = _Parser(source)
    parser.run()
    spec = parser.resolve()
    if spec is None:
        raise ParseError(sorted(parser.diags, key=lambda d: d.line))
    return spec


def load(path) -> ControllerSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_document(fh.read())


# --------------------------------------------------------------------------
# serialisation


def _num(x: float) -> str:
    """Shortest decimal that round-trips, never in exponent form."""
    text = np.format_float_positional(float(x), unique=True, trim="-")
    return "0" if text == "-0" else text


def serialize(spec: ControllerSpec) -> str:
    out = [f"CONTROLLER {spec.name}", ""]
    for var in spec.variables:
        head = f"VAR {var.role.upper()} {var.name} RANGE {_num(var.lo)} {_num(var.hi)}"
        if var.unit:
            head += f" UNIT {var.unit}"
        out.append(head)
        for term in var.terms:
            kind = "TRI" if term.mf.kind == "triangular" else "TRAP"
            out.append(f"  TERM {term.name} {kind} " + " ".join(_num(p) for p in term.mf.breakpoints))
        for alias, target in var.aliases:
            out.append(f"  ALIAS {alias} = {target}")
        out.append("")
    if spec.output_ranges is not None:
        out.append(f"RANGES {spec.output.name}")
        for term in spec.output.term_names:
            lo, hi = spec.output_ranges[term]
            out.append(f"  {term} {_num(lo)} {_num(hi)}")
        out.append("")
    for rule in spec.rules:
        joiner = f" {rule.connective.upper()} "
        ante = joiner.join(f"{v} IS {t}" for v, t in rule.antecedents)
        out.append(f"RULE IF {ante} THEN {rule.consequent[0]} IS {rule.consequent[1]}")
    return "\n".join(out).rstrip("\n") + "\n"


# --------------------------------------------------------------------------
# validation


def _covers(rule: Rule, combo: dict[str, str], spec: ControllerSpec) -> bool:
    hits = [
        spec.variable(var).resolve(term) == combo[spec.variable(var).name]
        for var, term in rule.antecedents
    ]
    return all(hits) if rule.connective == AND else any(hits)


def _gaps(var: LinguisticVariable) -> list[tuple[float, float]]:
    xs = np.linspace(var.lo, var.hi, COVERAGE_POINTS)
    covered = np.zeros(COVERAGE_POINTS, dtype=bool)
    for term in var.terms:
        covered |= membership_array(term.mf, xs) > 0
    gaps, start = [], None
    for x, ok in zip(xs, covered):
        if not ok and start is None:
            start = x
        if ok and start is not None:
            gaps.append((start, prev))
            start = None
        prev = x
    if start is not None:
        gaps.append((start, xs[-1]))
    return gaps


def validate(spec: ControllerSpec) -> list[Diagnostic]:
    """Completeness, coverage and consistency diagnostics for a parsed spec."""
    diags: list[Diagnostic] = []
    lines = spec.lines
    head = lines.get(("controller",), 1)

    def line_of(key: tuple) -> int:
        return max(lines.get(key, head), 1)

    for var in spec.variables:
        for lo, hi in _gaps(var):
            where = f"{_num(round(lo, 9))}" if lo == hi else f"{_num(round(lo, 9))}..{_num(round(hi, 9))}"
            diags.append(Diagnostic(WARNING, line_of(("var", var.name)), f"coverage gap in {var.name} at {where}"))

    seen: dict[tuple, tuple[int, str]] = {}
    for i, rule in enumerate(spec.rules):
        key = (rule.connective, frozenset((spec.variable(v).name, spec.variable(v).resolve(t)) for v, t in rule.antecedents))
        consequent = spec.output.resolve(rule.consequent[1])
        if key in seen:
            first, earlier = seen[key]
            if earlier != consequent:
                diags.append(Diagnostic(ERROR, line_of(("rule", i)),
                                        f"conflicting consequents: {earlier} (line {first}) vs {consequent}"))
            else:
                diags.append(Diagnostic(WARNING, line_of(("rule", i)), f"duplicate rule (first at line {first})"))
        else:
            seen[key] = (line_of(("rule", i)), consequent)

    inputs = spec.inputs
    last_rule = line_of(("rule", len(spec.rules) - 1)) if spec.rules else head
    for combo in itertools.product(*(v.term_names for v in inputs)):
        assignment = {v.name: t for v, t in zip(inputs, combo)}
        if not any(_covers(rule, assignment, spec) for rule in spec.rules):
            label = "×".join(v.display_name(t) for v, t in zip(inputs, combo))
            diags.append(Diagnostic(WARNING, last_rule, f"uncovered combination {label}"))
    return diags
