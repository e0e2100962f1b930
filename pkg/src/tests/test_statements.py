import pytest
from hypothesis import given
from hypothesis import strategies as st

from src.statements import Policy, Provenance, Statement, StatementStore, TagRule, classify, insert, query

NAMES = ["D07", "I06", "I04", "M16", "T", "A1"]

statements = st.builds(
    Statement,
    name=st.sampled_from(NAMES),
    state=st.booleans(),
    time=st.integers(min_value=0, max_value=10_000),
)

tag_rules = st.builds(
    TagRule,
    tag=st.sampled_from(["Door", "Recognized", "Taken", "Chained"]),
    name=st.one_of(st.none(), st.sampled_from(NAMES + ["I0*", "*"])),
    state=st.one_of(st.none(), st.booleans()),
    requires_tag=st.one_of(st.none(), st.sampled_from(["Door", "Taken"])),
)


def test_overwrite_keeps_latest():
    store = StatementStore(Policy.OVERWRITE, [Statement("D7", False, 100)])
    insert(store, Statement("D7", True, 200))
    assert [s.key for s in store] == [("D7", True, 200)]


def test_append_keeps_history_in_time_order():
    store = StatementStore(Policy.APPEND)
    insert(store, Statement("I", False, 20))
    insert(store, Statement("I", True, 10))
    assert [s.key for s in query(store, "I")] == [("I", True, 10), ("I", False, 20)]


@pytest.mark.parametrize(
    "name, tag, expected",
    [
        ("*", "ObjectTaken", [("T", True, 50)]),
        ("D7", None, []),
        ("T", None, [("T", True, 50)]),
        ("*", "Missing", []),
    ],
)
def test_query(name, tag, expected):
    store = StatementStore(Policy.APPEND, [Statement("T", True, 50, frozenset({"ObjectTaken"}))])
    assert [s.key for s in store.query(name, tag)] == expected


def test_exists_ignores_state_and_time():
    store = StatementStore(Policy.OVERWRITE, [Statement("NearCabinet2", False, 0, frozenset({"Location"}))])
    assert store.exists(tag="Location")
    assert store.exists("NearCabinet2")
    assert not store.exists(tag="NearCabinet2")


def test_statement_rejects_bad_fields():
    with pytest.raises(ValueError):
        Statement("", True, 0)
    with pytest.raises(ValueError):
        Statement("D7", True, -1)


def test_dump_is_sorted_line_form():
    store = StatementStore(Policy.APPEND)
    store.insert(Statement("T", True, 50, frozenset({"Taken", "Derived"})))
    store.insert(Statement("D7", False, 10))
    assert store.dump() == "D7 F 10\nT T 50 Derived Taken"


def test_snapshot_is_independent():
    store = StatementStore(Policy.APPEND, [Statement("D7", True, 0)])
    snapshot = store.snapshot()
    store.insert(Statement("D7", False, 5))
    store.remove("D7")
    assert [s.key for s in snapshot] == [("D7", True, 0)]
    assert len(store) == 0


def test_classify_recognized():
    store = StatementStore(Policy.APPEND, [Statement("A1", True, 900), Statement("A1", False, 100)])
    rule = TagRule(tag="Recognized", name="A1", state=True)
    classify(store, [rule])
    assert [s.key for s in store.query(tag="Recognized")] == [("A1", True, 900)]
    before = store.dump()
    classify(store, [rule])
    assert store.dump() == before


def test_classify_chains_through_required_tags():
    store = StatementStore(Policy.APPEND, [Statement("I09", False, 5)])
    rules = [
        TagRule(tag="Cleaning", requires_tag="Item"),
        TagRule(tag="Item", name="I*"),
    ]
    classify(store, rules)
    assert store.latest("I09").tags == {"Item", "Cleaning"}


def test_classify_provenance_filter():
    store = StatementStore(
        Policy.APPEND,
        [Statement("T", True, 1, provenance=Provenance.DERIVED), Statement("D7", True, 1)],
    )
    classify(store, [TagRule(tag="Derived", provenance=Provenance.DERIVED)])
    assert [s.name for s in store.query(tag="Derived")] == ["T"]


@given(st.lists(statements, max_size=40))
def test_overwrite_cardinality_bounded_by_names(sts):
    store = StatementStore(Policy.OVERWRITE, sts)
    assert len(store) == len({s.name for s in sts})
    for name in {s.name for s in sts}:
        assert store.latest(name) == [s for s in sts if s.name == name][-1]


@given(st.lists(statements, max_size=40))
def test_append_keeps_everything(sts):
    store = StatementStore(Policy.APPEND, sts)
    assert len(store) == len(sts)
    for s in sts:
        assert s in store.query(s.name)


@given(st.lists(statements, max_size=20), st.lists(tag_rules, max_size=5))
def test_classify_idempotent_and_monotone(sts, rules):
    store = StatementStore(Policy.APPEND, sts)
    classify(store, rules)
    once = sorted((s.key, tuple(sorted(s.tags))) for s in store)
    classify(store, rules)
    twice = sorted((s.key, tuple(sorted(s.tags))) for s in store)
    assert once == twice
    assert sorted(key for key, _ in once) == sorted(s.key for s in sts)
