from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, Iterable, List, Mapping, Optional, Set, Tuple, Union

from src.statements import Statement

# A duration is either literal milliseconds or the name of a model threshold (δi, εi).
Duration = Union[int, str]


class ModelError(ValueError):
    """A structurally invalid rule or model."""


class Relation(str, Enum):
    LT = "<"
    GT = ">"


class TimeKind(str, Enum):
    TIME_OF = "time-of"
    MAX_TIME = "max-time"
    MIN_TIME = "min-time"
    NOW = "now"


@dataclass(frozen=True)
class Pattern:
    """`variable` binds a statement in `state` that is named `name` or carries `tag`."""

    variable: str
    state: bool
    name: Optional[str] = None
    tag: Optional[str] = None

    def __post_init__(self):
        if (self.name is None) == (self.tag is None):
            raise ModelError(f"Pattern '{self.variable}' needs exactly one of name/tag")

    def matches(self, st: Statement) -> bool:
        if st.state != self.state:
            return False
        if self.name is not None:
            return st.name == self.name
        return self.tag in st.tags


@dataclass(frozen=True)
class TemporalConstraint:
    """`t(lhs) + offset <relation> t(rhs)`, strict."""

    lhs: str
    relation: Relation
    rhs: str
    offset: Duration = 0


@dataclass(frozen=True)
class TimeExpr:
    kind: TimeKind
    variables: Tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind is TimeKind.NOW and self.variables:
            raise ModelError("now takes no variables")
        if self.kind is TimeKind.TIME_OF and len(self.variables) != 1:
            raise ModelError("time-of takes exactly one variable")
        if self.kind in (TimeKind.MAX_TIME, TimeKind.MIN_TIME) and not self.variables:
            raise ModelError(f"{self.kind.value} needs at least one variable")


@dataclass(frozen=True)
class Consequent:
    name: str
    state: bool
    time: TimeExpr


@dataclass(frozen=True)
class Rule:
    name: str
    patterns: Tuple[Pattern, ...]
    consequent: Consequent
    constraints: Tuple[TemporalConstraint, ...] = ()

    def __post_init__(self):
        variables = [p.variable for p in self.patterns]
        if not variables:
            raise ModelError(f"Rule '{self.name}' has no patterns")
        if len(set(variables)) != len(variables):
            raise ModelError(f"Rule '{self.name}' declares a variable twice")
        for var in self.unbound_variables():
            raise ModelError(f"Rule '{self.name}': unbound variable '{var}'")

    @property
    def produces(self) -> str:
        return self.consequent.name

    def variables(self) -> Set[str]:
        return {p.variable for p in self.patterns}

    def unbound_variables(self) -> List[str]:
        bound = self.variables()
        used = [v for c in self.constraints for v in (c.lhs, c.rhs)]
        used += list(self.consequent.time.variables)
        return [v for v in dict.fromkeys(used) if v not in bound]

    def dependencies(self) -> Set[str]:
        return {p.name for p in self.patterns if p.name is not None}

    def thresholds_used(self) -> Set[str]:
        return {c.offset for c in self.constraints if isinstance(c.offset, str)}


@dataclass(frozen=True)
class DwellRule:
    """
    Asserts `out:⊤` once the intervals where `source` holds `state` sum to `threshold`,
    counting only time after the earliest ⊤ statement named `after` when given.
    An `unbroken` dwell needs a single interval of at least `threshold`.
    """

    out: str
    source: str
    threshold: Duration
    after: Optional[str] = None
    state: bool = True
    unbroken: bool = False

    @property
    def name(self) -> str:
        return self.out

    @property
    def produces(self) -> str:
        return self.out

    def dependencies(self) -> Set[str]:
        deps = {self.source}
        if self.after is not None:
            deps.add(self.after)
        return deps

    def thresholds_used(self) -> Set[str]:
        return {self.threshold} if isinstance(self.threshold, str) else set()


AnyRule = Union[Rule, DwellRule]


def order_rules(rules: Iterable[AnyRule]) -> Tuple[AnyRule, ...]:
    """
    Order rules so that producers come before consumers (stable otherwise).

    Raises ModelError on a cyclic chain.
    """
    rules = list(rules)
    producers: Dict[str, List[int]] = {}
    for idx, rule in enumerate(rules):
        producers.setdefault(rule.produces, []).append(idx)

    ordered: List[int] = []
    state: Dict[int, str] = {}

    def visit(idx: int, path: List[str]) -> None:
        if state.get(idx) == "done":
            return
        if state.get(idx) == "active":
            raise ModelError(f"cyclic rule chain: {' -> '.join(path + [rules[idx].name])}")
        state[idx] = "active"
        for dep in sorted(rules[idx].dependencies()):
            for producer in producers.get(dep, []):
                visit(producer, path + [rules[idx].name])
        state[idx] = "done"
        ordered.append(idx)

    for idx in range(len(rules)):
        visit(idx, [])
    return tuple(rules[idx] for idx in ordered)


@dataclass(frozen=True)
class Model:
    """
    An acyclic chain of rules whose `final_name` statement asserts the modelled activity.
    """

    final_name: str
    rules: Tuple[AnyRule, ...]
    thresholds: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.rules:
            raise ModelError("no rules")
        object.__setattr__(self, "rules", order_rules(self.rules))
        object.__setattr__(self, "thresholds", dict(self.thresholds))
        finals = [r for r in self.rules if r.produces == self.final_name]
        if len(finals) != 1:
            raise ModelError(
                f"final statement '{self.final_name}' must be produced by exactly one rule, found {len(finals)}"
            )
        missing = sorted({t for r in self.rules for t in r.thresholds_used()} - set(self.thresholds))
        if missing:
            raise ModelError(f"unknown threshold(s): {', '.join(missing)}")

    def resolve(self, duration: Duration) -> int:
        if isinstance(duration, str):
            return self.thresholds[duration]
        return duration

    def with_thresholds(self, overrides: Mapping[str, int]) -> "Model":
        unknown = set(overrides) - set(self.thresholds)
        if unknown:
            raise ModelError(f"model '{self.final_name}' has no threshold(s) {sorted(unknown)}")
        return replace(self, thresholds={**self.thresholds, **overrides})

    def relevant_names(self) -> Set[str]:
        """Statement names the model reads that no rule of the model produces."""
        produced = {r.produces for r in self.rules}
        return {dep for r in self.rules for dep in r.dependencies()} - produced

    def relevant_tags(self) -> Set[str]:
        return {p.tag for r in self.rules if isinstance(r, Rule) for p in r.patterns if p.tag is not None}
