from pathlib import Path
from typing import List, Optional, Union

import lark
from lark import Transformer, v_args

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

grammar = r"""
// fluent model files: one block per rule
start: item*

?item: model_decl
     | threshold_decl
     | rule
     | dwell

model_decl: "model" NAME
threshold_decl: "threshold" NAME "=" DURATION

rule: "rule" NAME ":" "when" patterns [conditions] "then" NAME ":" STATE "at" time_expr
patterns: pattern ("," pattern)*
conditions: "if" constraint ("," constraint)*

pattern: NAME ":" STATE "is" NAME -> exact_pattern
       | NAME ":" STATE "in" NAME -> tag_pattern

constraint: "t" "(" NAME ")" [ "+" offset ] RELATION "t" "(" NAME ")"

?offset: DURATION -> literal_offset
       | NAME -> named_offset

time_expr: "time-of" "(" NAME ")" -> time_of
         | "max-time" "(" NAME ("," NAME)* ")" -> max_time
         | "min-time" "(" NAME ("," NAME)* ")" -> min_time
         | "now" -> now

dwell: "dwell" NAME ":" NAME [":" STATE] "for" offset ["after" NAME] [UNBROKEN]

STATE: "⊤" | "⊥" | "T" | "F"
RELATION: "<" | ">"
UNBROKEN: "unbroken"
DURATION: /\d+(?:ms|min|s|h)?/
NAME: /[^\W\d][\w\-]*/

COMMENT: /#[^\n]*/
%import common.WS
%ignore WS
%ignore COMMENT
"""

_parser = lark.Lark(grammar, start="start", parser="lalr", propagate_positions=True)


class ModelParseError(ModelError):
    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.message = message
        self.line = line
        self.column = column
        where = f" at line {line}, column {column}" if line is not None else ""
        super().__init__(f"{message}{where}")


class _Block:
    """A parsed block together with its position for error reporting."""

    def __init__(self, kind: str, value, meta):
        self.kind = kind
        self.value = value
        self.line = getattr(meta, "line", None)
        self.column = getattr(meta, "column", None)


def _state(token) -> bool:
    return str(token) in ("⊤", "T")


class _ModelBuilder(Transformer):
    @v_args(meta=True)
    def model_decl(self, meta, children):
        return _Block("model", str(children[0]), meta)

    @v_args(meta=True)
    def threshold_decl(self, meta, children):
        name, duration = children
        return _Block("threshold", (str(name), parse_duration(str(duration))), meta)

    @v_args(inline=True)
    def exact_pattern(self, var, state, name):
        return Pattern(str(var), _state(state), name=str(name))

    @v_args(inline=True)
    def tag_pattern(self, var, state, tag):
        return Pattern(str(var), _state(state), tag=str(tag))

    def patterns(self, children):
        return list(children)

    def conditions(self, children):
        return list(children)

    @v_args(inline=True)
    def literal_offset(self, token):
        return parse_duration(str(token))

    @v_args(inline=True)
    def named_offset(self, token):
        return str(token)

    @v_args(inline=True)
    def constraint(self, lhs, offset, relation, rhs):
        return TemporalConstraint(str(lhs), Relation(str(relation)), str(rhs), 0 if offset is None else offset)

    def time_of(self, children):
        return TimeExpr(TimeKind.TIME_OF, tuple(str(c) for c in children))

    def max_time(self, children):
        return TimeExpr(TimeKind.MAX_TIME, tuple(str(c) for c in children))

    def min_time(self, children):
        return TimeExpr(TimeKind.MIN_TIME, tuple(str(c) for c in children))

    def now(self, children):
        return TimeExpr(TimeKind.NOW)

    @v_args(meta=True)
    def rule(self, meta, children):
        name, patterns, constraints, out, state, time = children
        return _Block("rule", (str(name), patterns, constraints or [], Consequent(str(out), _state(state), time)), meta)

    @v_args(meta=True)
    def dwell(self, meta, children):
        out, source, state, threshold, after, unbroken = children
        rule = DwellRule(
            str(out),
            str(source),
            threshold,
            None if after is None else str(after),
            state=True if state is None else _state(state),
            unbroken=unbroken is not None,
        )
        return _Block("dwell", rule, meta)

    def start(self, children):
        return list(children)


def _unbound(patterns: List[Pattern], constraints: List[TemporalConstraint], consequent: Consequent) -> List[str]:
    bound = {p.variable for p in patterns}
    used = [v for c in constraints for v in (c.lhs, c.rhs)] + list(consequent.time.variables)
    return [v for v in dict.fromkeys(used) if v not in bound]


def _default_final(rules) -> str:
    consumed = {dep for r in rules for dep in r.dependencies()}
    sinks = list(dict.fromkeys(r.produces for r in rules if r.produces not in consumed))
    if len(sinks) != 1:
        raise ModelParseError(f"cannot infer the final statement (candidates: {sinks}); add a 'model' header")
    return sinks[0]


def parse_model(text: str) -> Model:
    """
    Parse model DSL text into a Model.

    Raises ModelParseError (with line/column when known) on syntax errors,
    unbound variables, unknown thresholds, cyclic rule chains and empty input.
    """
    try:
        blocks = _ModelBuilder().transform(_parser.parse(text))
    except lark.exceptions.UnexpectedInput as e:
        raise ModelParseError(f"syntax error: {str(e).splitlines()[0]}", e.line, e.column) from None
    except lark.exceptions.VisitError as e:
        raise ModelParseError(str(e.orig_exc)) from None

    final_name = None
    thresholds = {}
    rules = []
    for block in blocks:
        if block.kind == "model":
            final_name = block.value
        elif block.kind == "threshold":
            name, value = block.value
            thresholds[name] = value
        elif block.kind == "dwell":
            rules.append(block.value)
        else:
            name, patterns, constraints, consequent = block.value
            unbound = _unbound(patterns, constraints, consequent)
            if unbound:
                raise ModelParseError(f"unbound variable '{unbound[0]}' in rule '{name}'", block.line, block.column)
            try:
                rules.append(Rule(name, tuple(patterns), consequent, tuple(constraints)))
            except ModelError as e:
                raise ModelParseError(str(e), block.line, block.column) from None

    if not rules:
        raise ModelParseError("no rules")
    if final_name is None:
        final_name = _default_final(rules)
    try:
        return Model(final_name, tuple(rules), thresholds)
    except ModelParseError:
        raise
    except ModelError as e:
        raise ModelParseError(str(e)) from None


def load_model(path: Union[str, Path]) -> Model:
    path = Path(path)
    try:
        return parse_model(path.read_text(encoding="utf-8"))
    except ModelParseError as e:
        raise ModelParseError(f"{path}: {e.message}", e.line, e.column) from None


def _format_state(state: bool) -> str:
    return "⊤" if state else "⊥"


def _format_offset(offset) -> str:
    return offset if isinstance(offset, str) else format_duration(offset)


def _format_rule(rule: Rule) -> str:
    patterns = ", ".join(
        f"{p.variable}:{_format_state(p.state)} " + (f"is {p.name}" if p.name is not None else f"in {p.tag}")
        for p in rule.patterns
    )
    text = f"rule {rule.name}: when {patterns}"
    if rule.constraints:
        parts = []
        for c in rule.constraints:
            offset = f"+{_format_offset(c.offset)}" if c.offset != 0 else ""
            parts.append(f"t({c.lhs}){offset} {c.relation.value} t({c.rhs})")
        text += " if " + ", ".join(parts)
    expr = rule.consequent.time
    time = expr.kind.value if expr.kind is TimeKind.NOW else f"{expr.kind.value}({', '.join(expr.variables)})"
    return text + f" then {rule.consequent.name}:{_format_state(rule.consequent.state)} at {time}"


def format_model(model: Model) -> str:
    """Print a Model back to DSL text; parse_model(format_model(m)) == m."""
    lines = [f"model {model.final_name}"]
    lines += [f"threshold {name} = {format_duration(value)}" for name, value in model.thresholds.items()]
    for rule in model.rules:
        if isinstance(rule, DwellRule):
            source = rule.source if rule.state else f"{rule.source}:{_format_state(rule.state)}"
            after = f" after {rule.after}" if rule.after is not None else ""
            unbroken = " unbroken" if rule.unbroken else ""
            lines.append(f"dwell {rule.out}: {source} for {_format_offset(rule.threshold)}{after}{unbroken}")
        else:
            lines.append(_format_rule(rule))
    return "\n".join(lines) + "\n"
