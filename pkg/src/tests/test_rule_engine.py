import itertools
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.rules import (
    Consequent,
    EvaluationError,
    Model,
    Pattern,
    Relation,
    Rule,
    TemporalConstraint,
    TimeExpr,
    TimeKind,
    accumulate_duration,
    bind,
    check_constraints,
    evaluate_model,
    fire,
    load_model,
    parse_model,
)
from src.statements import Policy, Statement, StatementStore

MEDICATION = """
model A1
threshold δ1 = 60s

rule taken: when D:⊤ is D7, I:⊥ is I6, O:⊥ is I4
    if t(D) < t(I), t(D) < t(O)
    then T:⊤ at max-time(I, O)

rule released: when D:⊥ is D7, I:⊤ is I6, O:⊤ is I4
    if t(D) < t(I), t(D) < t(O)
    then R:⊤ at time-of(D)

rule medication: when T:⊤ is T, R:⊤ is R
    if t(T)+δ1 < t(R)
    then A1:⊤ at time-of(R)
"""


def store_of(*statements, policy=Policy.APPEND):
    return StatementStore(policy, statements)


def medication_store():
    return store_of(
        Statement("D7", True, 0),
        Statement("I6", False, 10),
        Statement("I4", False, 12),
        Statement("D7", False, 70_000),
        Statement("I6", True, 70_010),
        Statement("I4", True, 70_012),
    )


# -------------------------
# bind / check_constraints / fire
# -------------------------
def test_bind_single_exact_match():
    rule = Rule("r", (Pattern("D", True, name="D7"),), Consequent("X", True, TimeExpr(TimeKind.NOW)))
    (binding,) = bind(rule, store_of(Statement("D7", True, 100)))
    assert binding["D"].time == 100


def test_bind_tag_pattern_enumerates_all():
    rule = Rule("r", (Pattern("I", False, tag="ItemPresence"),), Consequent("X", True, TimeExpr(TimeKind.NOW)))
    store = store_of(
        Statement("I6", False, 5, frozenset({"ItemPresence"})),
        Statement("I4", False, 9, frozenset({"ItemPresence"})),
    )
    assert [b["I"].name for b in bind(rule, store)] == ["I6", "I4"]
    assert bind(rule, store_of()) == []


def test_bind_is_injective():
    rule = Rule(
        "r",
        (Pattern("A", True, tag="Item"), Pattern("B", True, tag="Item")),
        Consequent("X", True, TimeExpr(TimeKind.NOW)),
    )
    store = store_of(Statement("I1", True, 1, frozenset({"Item"})))
    assert bind(rule, store) == []
    store.insert(Statement("I2", True, 2, frozenset({"Item"})))
    assert sorted((b["A"].name, b["B"].name) for b in bind(rule, store)) == [("I1", "I2"), ("I2", "I1")]


@pytest.mark.parametrize(
    "t_lhs, offset, t_rhs, expected",
    [
        (100, 0, 150, True),
        (100, 60_000, 200, False),
        (100, 50, 200, True),
        (100, 0, 100, False),
    ],
)
def test_check_constraints_is_strict(t_lhs, offset, t_rhs, expected):
    binding = {"T": Statement("T", True, t_lhs), "R": Statement("R", True, t_rhs)}
    assert check_constraints(binding, [TemporalConstraint("T", Relation.LT, "R", offset)]) is expected


def test_check_constraints_resolves_named_offsets():
    binding = {"T": Statement("T", True, 100), "R": Statement("R", True, 200)}
    constraint = TemporalConstraint("T", Relation.LT, "R", "δ1")
    assert check_constraints(binding, [constraint], {"δ1": 50})
    with pytest.raises(EvaluationError):
        check_constraints(binding, [constraint])


def test_check_constraints_unbound_variable():
    with pytest.raises(EvaluationError):
        check_constraints({"T": Statement("T", True, 1)}, [TemporalConstraint("T", Relation.LT, "Q")])


@pytest.mark.parametrize(
    "kind, variables, expected",
    [
        (TimeKind.MAX_TIME, ("I", "O"), 140),
        (TimeKind.MIN_TIME, ("I", "O"), 120),
        (TimeKind.TIME_OF, ("D",), 300),
        (TimeKind.NOW, (), 999),
    ],
)
def test_fire_time_expressions(kind, variables, expected):
    patterns = (Pattern("I", False, name="I6"), Pattern("O", False, name="I4"), Pattern("D", False, name="D7"))
    rule = Rule("r", patterns, Consequent("T", True, TimeExpr(kind, variables)))
    binding = {"I": Statement("I6", False, 120), "O": Statement("I4", False, 140), "D": Statement("D7", False, 300)}
    out = fire(rule, binding, clock=999)
    assert (out.name, out.state, out.time) == ("T", True, expected)


# -------------------------
# evaluate_model
# -------------------------
def test_medication_trace():
    store = medication_store()
    satisfied, derived = evaluate_model(parse_model(MEDICATION), store, clock=80_000)
    assert satisfied
    assert sorted(s.key for s in derived) == [("A1", True, 70_000), ("R", True, 70_000), ("T", True, 12)]


def test_medication_delay_not_met():
    model = parse_model(MEDICATION).with_thresholds({"δ1": 80_000})
    satisfied, derived = evaluate_model(model, medication_store(), clock=80_000)
    assert not satisfied
    assert "A1" not in {s.name for s in derived}


def test_evaluate_empty_store():
    assert evaluate_model(parse_model(MEDICATION), store_of(), clock=0) == (False, [])


def test_evaluate_is_idempotent():
    model = parse_model(MEDICATION)
    store = medication_store()
    evaluate_model(model, store, clock=80_000)
    size = len(store)
    assert evaluate_model(model, store, clock=80_000) == (True, [])
    assert len(store) == size


# the two-rule split of "taken" by which item went missing last, with ties on both sides
SPLIT = """
model Done
rule last_i: when I:⊥ is I6, O:⊥ is I4 if t(I)+1 > t(O) then T:⊤ at time-of(I)
rule last_o: when I:⊥ is I6, O:⊥ is I4 if t(O)+1 > t(I) then T:⊤ at time-of(O)
rule done: when X:⊤ is T then Done:⊤ at time-of(X)
"""
MAX_TIME = "rule taken: when I:⊥ is I6, O:⊥ is I4 then T:⊤ at max-time(I, O)"


@pytest.mark.parametrize("t_i, t_o", [(120, 140), (140, 120), (130, 130)])
def test_max_time_matches_case_split(t_i, t_o):
    def derived(text):
        store = store_of(Statement("I6", False, t_i), Statement("I4", False, t_o))
        return {s.key for s in evaluate_model(parse_model(text), store, clock=1000)[1] if s.name == "T"}

    assert derived(MAX_TIME) == derived(SPLIT) == {("T", True, max(t_i, t_o))}


# -------------------------
# accumulate_duration
# -------------------------
def test_accumulate_duration_example():
    store = store_of(Statement("Near", True, 0), Statement("Near", False, 30), Statement("Near", True, 50))
    out = accumulate_duration(store, "Near", 60, "H", clock=100)
    assert (out.name, out.state, out.time) == ("H", True, 80)


@pytest.mark.parametrize(
    "history, clock",
    [
        ([("Near", True, 0)], 10),
        ([], 100),
        ([("Near", False, 0), ("Near", False, 90)], 100),
    ],
)
def test_accumulate_duration_insufficient(history, clock):
    store = store_of(*(Statement(*h) for h in history))
    assert accumulate_duration(store, "Near", 60, "H", clock=clock) is None


def test_accumulate_duration_since_clips_history():
    store = store_of(Statement("Near", True, 0), Statement("Near", False, 100))
    assert accumulate_duration(store, "Near", 60, "H", clock=200, since=50) is None
    assert accumulate_duration(store, "Near", 40, "H", clock=200, since=50).time == 90


def dwell_oracle(history, threshold, clock, since, state=True, unbroken=False):
    """Millisecond sweep: the state at t is that of the last statement at or before t."""
    total = 0
    for t in range(since or 0, clock):
        current = [s for s, at in history if at <= t]
        if current and current[-1] == state:
            total += 1
            if total == threshold:
                return t + 1
        elif unbroken:
            total = 0
    return None


@settings(max_examples=300, deadline=None)
@given(
    st.lists(st.tuples(st.booleans(), st.integers(0, 120)), max_size=8),
    st.integers(1, 150),
    st.integers(0, 150),
    st.one_of(st.none(), st.integers(0, 100)),
    st.booleans(),
    st.booleans(),
)
def test_accumulate_duration_matches_sweep(history, threshold, clock, since, state, unbroken):
    history = sorted(history, key=lambda h: h[1])
    store = store_of(*(Statement("Near", s, at) for s, at in history))
    out = accumulate_duration(store, "Near", threshold, "H", clock=clock, since=since, state=state, unbroken=unbroken)
    expected = dwell_oracle(history, threshold, clock, since, state, unbroken)
    assert (out.time if out is not None else None) == expected


def test_unbroken_dwell_does_not_add_up_short_intervals():
    store = store_of(
        Statement("P01", True, 0),
        Statement("P01", False, 5_000),
        Statement("P01", True, 40_000),
        Statement("P01", False, 45_000),
    )
    assert accumulate_duration(store, "P01", 8_000, "U", clock=60_000).time == 43_000
    assert accumulate_duration(store, "P01", 8_000, "U", clock=60_000, unbroken=True) is None
    assert accumulate_duration(store, "P01", 5_000, "U", clock=60_000, unbroken=True).time == 5_000


def test_dwell_on_false_state_measures_absence():
    store = store_of(Statement("I03", True, 0), Statement("I03", False, 10_000), Statement("I03", True, 80_000))
    out = accumulate_duration(store, "I03", 60_000, "G", clock=90_000, state=False, unbroken=True)
    assert (out.name, out.state, out.time) == ("G", True, 70_000)


# -------------------------
# oracle equivalence
# -------------------------
BASE_NAMES = ["a", "b", "c"]


@st.composite
def instances(draw):
    statements = draw(
        st.lists(
            st.builds(
                Statement,
                name=st.sampled_from(BASE_NAMES),
                state=st.booleans(),
                time=st.integers(0, 50),
                tags=st.sampled_from([frozenset(), frozenset({"k"})]),
            ),
            max_size=6,
        )
    )
    readable = list(BASE_NAMES)
    n_rules = draw(st.integers(1, 3))
    rules = []
    for i in range(n_rules):
        out = "F" if i == n_rules - 1 else f"R{i}"
        variables = [f"v{j}" for j in range(draw(st.integers(1, 2)))]
        patterns = []
        for var in variables:
            if draw(st.booleans()):
                patterns.append(Pattern(var, draw(st.booleans()), name=draw(st.sampled_from(readable))))
            else:
                patterns.append(Pattern(var, draw(st.booleans()), tag="k"))
        constraints = tuple(
            TemporalConstraint(
                draw(st.sampled_from(variables)),
                draw(st.sampled_from(list(Relation))),
                draw(st.sampled_from(variables)),
                draw(st.integers(0, 20)),
            )
            for _ in range(draw(st.integers(0, 2)))
        )
        kind = draw(st.sampled_from(list(TimeKind)))
        if kind is TimeKind.NOW:
            expr = TimeExpr(kind)
        elif kind is TimeKind.TIME_OF:
            expr = TimeExpr(kind, (draw(st.sampled_from(variables)),))
        else:
            expr = TimeExpr(kind, tuple(draw(st.lists(st.sampled_from(variables), min_size=1, max_size=2, unique=True))))
        rules.append(Rule(f"r{i}", tuple(patterns), Consequent(out, draw(st.booleans()), expr), constraints))
        readable.append(out)
    return statements, Model("F", tuple(rules))


def brute_force(model, statements, clock):
    """Fire every rule on every injective assignment, in any order, until nothing new appears."""
    known = list(statements)
    keys = {s.key for s in known}
    derived = set()
    changed = True
    while changed:
        changed = False
        for rule in model.rules:
            for combo in itertools.permutations(range(len(known)), len(rule.patterns)):
                binding = {p.variable: known[i] for p, i in zip(rule.patterns, combo)}
                if not all(p.matches(binding[p.variable]) for p in rule.patterns):
                    continue
                if not all(
                    (binding[c.lhs].time + c.offset < binding[c.rhs].time)
                    if c.relation is Relation.LT
                    else (binding[c.lhs].time + c.offset > binding[c.rhs].time)
                    for c in rule.constraints
                ):
                    continue
                times = [binding[v].time for v in rule.consequent.time.variables]
                time = {
                    TimeKind.NOW: lambda: clock,
                    TimeKind.TIME_OF: lambda: times[0],
                    TimeKind.MAX_TIME: lambda: max(times),
                    TimeKind.MIN_TIME: lambda: min(times),
                }[rule.consequent.time.kind]()
                key = (rule.consequent.name, rule.consequent.state, time)
                if key not in keys:
                    keys.add(key)
                    derived.add(key)
                    known.append(Statement(*key))
                    changed = True
    satisfied = any(name == "F" and state for name, state, _ in keys)
    return satisfied, derived


@settings(max_examples=1000, deadline=None)
@given(instances())
def test_evaluate_model_matches_brute_force(instance):
    statements, model = instance
    store = store_of(*statements)
    satisfied, derived = evaluate_model(model, store, clock=60)
    expected_satisfied, expected_derived = brute_force(model, statements, clock=60)
    assert satisfied == expected_satisfied
    assert {s.key for s in derived} == expected_derived
    assert len(derived) == len(expected_derived)


# -------------------------
# shipped duration models
# -------------------------
MODELS_DIR = Path(__file__).resolve().parents[2] / "models"


@pytest.mark.parametrize(
    "history, clock, expected",
    [
        ([(True, 4_000), (False, 45_000)], 45_000, [("U", 34_000), ("A4", 45_000)]),
        ([(True, 0), (False, 5_000), (True, 40_000), (False, 45_000)], 45_000, []),
        ([(True, 0), (False, 20_000), (True, 25_000), (False, 45_000)], 45_000, []),
    ],
)
def test_phone_model_needs_one_long_call(history, clock, expected):
    model = load_model(MODELS_DIR / "a4_phone.fluent")
    store = store_of(*(Statement("P01", state, at) for state, at in history))
    satisfied, derived = evaluate_model(model, store, clock)
    assert satisfied is bool(expected)
    assert [(st.name, st.time) for st in derived] == expected


@pytest.mark.parametrize(
    "history, clock, expected",
    [
        ([(False, 4_000), (True, 91_000)], 91_000, [("G", 64_000), ("A2", 91_000)]),
        ([(False, 0), (True, 5_000), (False, 70_000), (True, 75_000)], 75_000, []),
        ([(False, 0)], 100_000, [("G", 60_000)]),
    ],
)
def test_dvd_model_needs_one_long_absence(history, clock, expected):
    model = load_model(MODELS_DIR / "a2_dvd.fluent")
    store = store_of(*(Statement("I03", state, at) for state, at in history))
    satisfied, derived = evaluate_model(model, store, clock)
    assert satisfied is any(name == "A2" for name, _ in expected)
    assert [(st.name, st.time) for st in derived] == expected
