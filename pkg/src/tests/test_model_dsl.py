from pathlib import Path

import pytest

from src.rules import (
    DwellRule,
    ModelParseError,
    Relation,
    TimeKind,
    format_model,
    load_model,
    parse_model,
)

MODELS_DIR = Path(__file__).resolve().parents[2] / "models"

PHONE = """
# handset in use for at least δ4
model A4
threshold δ4 = 30s

rule phone: when S:⊤ is P01, E:⊥ is P01
    if t(S)+δ4 < t(E)
    then A4:⊤ at time-of(E)
"""


def test_parse_phone_model():
    model = parse_model(PHONE)
    assert model.final_name == "A4"
    assert model.thresholds == {"δ4": 30_000}
    (rule,) = model.rules
    assert [(p.variable, p.state, p.name) for p in rule.patterns] == [("S", True, "P01"), ("E", False, "P01")]
    (constraint,) = rule.constraints
    assert (constraint.lhs, constraint.relation, constraint.rhs, constraint.offset) == ("S", Relation.LT, "E", "δ4")
    assert rule.consequent.time.kind is TimeKind.TIME_OF


def test_ascii_states_and_tag_patterns():
    model = parse_model("rule w: when D:T is D11, F:T in WaterFlow if t(D) < t(F) then W:F at now")
    (rule,) = model.rules
    assert model.final_name == "W"
    assert rule.patterns[1].tag == "WaterFlow"
    assert rule.consequent.state is False
    assert rule.consequent.time.kind is TimeKind.NOW


def test_rule_without_conditions():
    model = parse_model("rule r: when X:⊥ is I05, Y:⊥ is I07 then U:⊤ at max-time(X, Y)")
    assert model.rules[0].constraints == ()


def test_dwell_block():
    model = parse_model(
        """
        model A8
        threshold δ8 = 20s
        dwell S: InCorridor for δ8 after D12
        rule outfit: when S:⊤ is S, L:⊤ in OutfitDestination if t(S) < t(L) then A8:⊤ at time-of(L)
        """
    )
    dwell = model.rules[0]
    assert dwell == DwellRule("S", "InCorridor", "δ8", "D12")
    assert model.relevant_names() == {"InCorridor", "D12"}
    assert model.relevant_tags() == {"OutfitDestination"}


def test_rules_are_ordered_producers_first():
    model = parse_model(
        """
        model A
        rule final: when T:⊤ is T then A:⊤ at time-of(T)
        rule taken: when D:⊤ is D7 then T:⊤ at time-of(D)
        """
    )
    assert [r.name for r in model.rules] == ["taken", "final"]


@pytest.mark.parametrize(
    "text, message",
    [
        ("", "no rules"),
        ("# only a comment\n", "no rules"),
        ("rule r: when X:⊤ is A if t(X) < t(Y) then B:⊤ at time-of(X)", "unbound variable 'Y'"),
        ("rule r: when X:⊤ is A then B:⊤ at max-time(X, Z)", "unbound variable 'Z'"),
        ("rule r: when X:⊤ is A, Y:⊤ is B if t(X)+δ9 < t(Y) then C:⊤ at now", "unknown threshold"),
        ("rule r: when X:⊤ is A, X:⊥ is B then C:⊤ at now", "declares a variable twice"),
        (
            "model X\nrule a: when Y:⊤ is Y then X:⊤ at now\nrule b: when X:⊤ is X then Y:⊤ at now",
            "cyclic rule chain",
        ),
    ],
)
def test_parse_errors(text, message):
    with pytest.raises(ModelParseError) as excinfo:
        parse_model(text)
    assert message in str(excinfo.value)


def test_syntax_error_carries_position():
    text = "rule a: when X:⊤ is A then B:⊤ at now\nrule b: when X:? is A then C:⊤ at now\n"
    with pytest.raises(ModelParseError) as excinfo:
        parse_model(text)
    assert excinfo.value.line == 2
    assert excinfo.value.column is not None


def test_load_model_prefixes_path(tmp_path):
    path = tmp_path / "broken.fluent"
    path.write_text("rule r: when X:⊤ is A if t(X) < t(Q) then B:⊤ at now\n", encoding="utf-8")
    with pytest.raises(ModelParseError) as excinfo:
        load_model(path)
    assert str(path) in str(excinfo.value)


@pytest.mark.parametrize("path", sorted(MODELS_DIR.glob("*.fluent")), ids=lambda p: p.stem)
def test_shipped_models_round_trip(path):
    model = load_model(path)
    assert model.final_name == f"A{path.stem[1]}"
    assert parse_model(format_model(model)) == model


def test_format_keeps_literal_offsets():
    model = parse_model("rule r: when I:⊤ is I6, O:⊤ is I4 if t(I)+1 > t(O), t(O)+1500 < t(I) then T:⊤ at time-of(I)")
    text = format_model(model)
    assert "t(I)+1ms > t(O)" in text
    assert "t(O)+1500ms < t(I)" in text
    assert parse_model(text) == model


def test_unbroken_dwell_on_false_state():
    model = parse_model(
        """
        model A2
        threshold δ2 = 60s
        dwell G: I03:⊥ for δ2 unbroken
        rule dvd: when G:⊤ is G, Y:⊤ is I03 if t(G) < t(Y) then A2:⊤ at time-of(Y)
        """
    )
    assert model.rules[0] == DwellRule("G", "I03", "δ2", state=False, unbroken=True)
    assert "dwell G: I03:⊥ for δ2 unbroken" in format_model(model)
    assert parse_model(format_model(model)) == model
    assert model.relevant_names() == {"I03"}
