"""Mamdani fuzzy inference with a small rule language and a washing-machine controller."""

from .core import (
    ConfigurationError,
    FuzzifiedInput,
    LinguisticVariable,
    MembershipFunction,
    NoRuleFired,
    Rule,
    RuleBase,
    Term,
    TermStrengths,
    defuzzify_centroid,
    defuzzify_paper_range,
    evaluate_rule,
    fuzzify,
    infer,
    membership,
)
from .dsl import ControllerSpec, Diagnostic, ParseError, parse_document, serialize, validate
from .washctl import (
    SensorCalibration,
    WashDecision,
    build_washing_controller,
    opacity_to_saturation,
    pressure_to_dirtiness,
    wash_time,
)

__version__ = "0.1.0"
