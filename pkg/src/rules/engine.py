import logging
from typing import Callable, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

from src.statements import Provenance, Statement, StatementStore, Timestamp

from .model import (
    AnyRule,
    DwellRule,
    Model,
    Relation,
    Rule,
    TemporalConstraint,
    TimeKind,
)

logger = logging.getLogger("fluentnet.rules")

Binding = Dict[str, Statement]


class EvaluationError(ValueError):
    """Raised when a rule cannot be evaluated (signals a malformed rule)."""


def _resolve(offset, thresholds: Optional[Mapping[str, int]]) -> int:
    if isinstance(offset, str):
        if thresholds is None or offset not in thresholds:
            raise EvaluationError(f"unknown threshold '{offset}'")
        return thresholds[offset]
    return offset


def _holds(constraint: TemporalConstraint, binding: Binding, thresholds) -> bool:
    for var in (constraint.lhs, constraint.rhs):
        if var not in binding:
            raise EvaluationError(f"unbound variable '{var}'")
    lhs = binding[constraint.lhs].time + _resolve(constraint.offset, thresholds)
    rhs = binding[constraint.rhs].time
    if constraint.relation is Relation.LT:
        return lhs < rhs
    return lhs > rhs


def check_constraints(
    binding: Binding,
    constraints: Sequence[TemporalConstraint],
    thresholds: Optional[Mapping[str, int]] = None,
) -> bool:
    """True iff every `t(lhs)+offset rel t(rhs)` holds; ties make the strict relation false."""
    return all(_holds(c, binding, thresholds) for c in constraints)


def _assignments(
    rule: Rule,
    store: StatementStore,
    check: Optional[Callable[[TemporalConstraint, Binding], bool]] = None,
) -> Iterator[Binding]:
    """
    Depth-first enumeration of injective pattern assignments in (time, name) order.
    When `check` is given, constraints are tested as soon as both their variables are bound.
    """
    candidates = [
        [st for st in store.query(p.name or "*", p.tag) if p.matches(st)]
        for p in rule.patterns
    ]
    if any(not c for c in candidates):
        return

    # constraints become checkable at the depth binding their later variable
    depth_of = {p.variable: i for i, p in enumerate(rule.patterns)}
    ready: List[List[TemporalConstraint]] = [[] for _ in rule.patterns]
    if check is not None:
        for c in rule.constraints:
            ready[max(depth_of[c.lhs], depth_of[c.rhs])].append(c)

    binding: Binding = {}
    used: set = set()

    def walk(depth: int) -> Iterator[Binding]:
        if depth == len(rule.patterns):
            yield dict(binding)
            return
        var = rule.patterns[depth].variable
        for st in candidates[depth]:
            if id(st) in used:
                continue
            binding[var] = st
            if all(check(c, binding) for c in ready[depth]):
                used.add(id(st))
                yield from walk(depth + 1)
                used.discard(id(st))
            del binding[var]

    yield from walk(0)


def bind(rule: Rule, store: StatementStore) -> List[Binding]:
    """Every assignment of store statements to the rule's pattern variables."""
    return list(_assignments(rule, store))


def fire(rule: Rule, binding: Binding, clock: Timestamp = 0) -> Statement:
    expr = rule.consequent.time
    times = [binding[v].time for v in expr.variables]
    if expr.kind is TimeKind.NOW:
        time = clock
    elif expr.kind is TimeKind.TIME_OF:
        time = times[0]
    elif expr.kind is TimeKind.MAX_TIME:
        time = max(times)
    else:
        time = min(times)
    return Statement(
        rule.consequent.name,
        rule.consequent.state,
        time,
        provenance=Provenance.DERIVED,
    )


def accumulate_duration(
    store: StatementStore,
    name: str,
    threshold: int,
    out_name: str,
    clock: Timestamp,
    since: Optional[Timestamp] = None,
    state: bool = True,
    unbroken: bool = False,
) -> Optional[Statement]:
    """
    Sum the lengths of the intervals where `name` held `state` and report the crossing instant.

    An interval opens at a statement in `state` and closes at the next statement in the
    other state (or at `clock`); repeated statements in `state` extend the open interval.
    With `since`, only time after that instant counts. With `unbroken`, intervals are not
    summed and one of them alone must reach `threshold`. Returns `out_name:⊤` stamped at
    the crossing instant.
    """
    segments: List[Tuple[int, int]] = []
    opened: Optional[int] = None
    for st in store.query(name):
        if st.time > clock:
            break
        if st.state == state and opened is None:
            opened = st.time
        elif st.state != state and opened is not None:
            segments.append((opened, st.time))
            opened = None
    if opened is not None:
        segments.append((opened, clock))

    total = 0
    for start, end in segments:
        if since is not None:
            start = max(start, since)
        if end < start:
            continue
        if unbroken:
            if end - start >= threshold:
                return Statement(out_name, True, start + threshold, provenance=Provenance.DERIVED)
            continue
        if total + (end - start) >= threshold:
            crossed = start + max(threshold - total, 0)
            return Statement(out_name, True, crossed, provenance=Provenance.DERIVED)
        total += end - start
    return None


def _rule_outputs(rule: AnyRule, store: StatementStore, model: Model, clock: Timestamp) -> List[Statement]:
    if isinstance(rule, DwellRule):
        since = None
        if rule.after is not None:
            anchors = [st for st in store.query(rule.after) if st.state]
            if not anchors:
                return []
            since = anchors[0].time
        st = accumulate_duration(
            store, rule.source, model.resolve(rule.threshold), rule.out, clock, since, rule.state, rule.unbroken
        )
        return [st] if st is not None else []

    check = lambda c, b: _holds(c, b, model.thresholds)
    return [fire(rule, binding, clock) for binding in _assignments(rule, store, check)]


def evaluate_model(model: Model, store: StatementStore, clock: Timestamp) -> Tuple[bool, List[Statement]]:
    """
    Fire every rule of the model to a fixpoint over `store`, appending derived statements.

    A consequent identical (name, state, time) to a statement already present is not
    re-asserted. Rules are ordered producers-first, so the first pass reaches the
    fixpoint and later passes (at most |rules| in total) only confirm it.
    """
    derived: List[Statement] = []
    for _ in range(len(model.rules)):
        produced = False
        for rule in model.rules:
            for st in _rule_outputs(rule, store, model, clock):
                if store.contains_key(st):
                    continue
                store.insert(st)
                derived.append(st)
                produced = True
        if not produced:
            break
    satisfied = any(st.state for st in store.query(model.final_name))
    if derived:
        logger.debug(f"Model {model.final_name} derived {[st.dump() for st in derived]} at {clock}")
    return satisfied, derived
