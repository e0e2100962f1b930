"""
rules evaluates temporal rules and chained models over statement stores
"""

from .durations import format_duration, parse_duration
from .model import (
    Consequent,
    DwellRule,
    Model,
    ModelError,
    Pattern,
    Relation,
    Rule,
    TemporalConstraint,
    TimeExpr,
    TimeKind,
)
from .engine import (
    Binding,
    EvaluationError,
    accumulate_duration,
    bind,
    check_constraints,
    evaluate_model,
    fire,
)
from .dsl import ModelParseError, format_model, load_model, parse_model

__all__ = [
    "format_duration",
    "parse_duration",
    "Consequent",
    "DwellRule",
    "Model",
    "ModelError",
    "Pattern",
    "Relation",
    "Rule",
    "TemporalConstraint",
    "TimeExpr",
    "TimeKind",
    "Binding",
    "EvaluationError",
    "accumulate_duration",
    "bind",
    "check_constraints",
    "evaluate_model",
    "fire",
    "ModelParseError",
    "format_model",
    "load_model",
    "parse_model",
]
