import pandas as pd
import pytest

from src.cli import main
from src.config import REPO_ROOT


def test_validate_shipped_models(capsys):
    assert main(["validate-models", str(REPO_ROOT / "models")]) == 0
    out = capsys.readouterr().out
    assert out.count(": ok (") == 8


def test_validate_reports_broken_model(tmp_path, capsys):
    (tmp_path / "good.fluent").write_text("rule r: when X:⊤ is D07 then A:⊤ at time-of(X)\n", encoding="utf-8")
    (tmp_path / "bad.fluent").write_text("rule r: when X:⊤ is D07 then A:⊤ at time-of(Q)\n", encoding="utf-8")
    assert main(["validate-models", str(tmp_path)]) == 1
    err = capsys.readouterr().err
    assert "bad.fluent" in err
    assert "unbound variable 'Q'" in err


def test_validate_empty_directory(tmp_path):
    assert main(["validate-models", str(tmp_path)]) == 1


def test_synth_compile_only(tmp_path):
    out = tmp_path / "runs" / "a4.txt"
    assert main(["synth", "--script", "a4_phone", "--compile-only", str(out)]) == 0
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "2008-02-27 12:00:00.000000 M13 ON 4"
    assert len(lines) == 11


def test_synth_replays_and_exports(tmp_path):
    assert main(["synth", "--script", "a1_medication", "--virtual", "--out", str(tmp_path), "--node", "O1"]) == 0
    recognitions = pd.read_csv(tmp_path / "recognitions.csv")
    assert recognitions[["activity", "recognized_at", "outcome"]].values.tolist() == [[1, 49_000, "true_positive"]]
    trace = pd.read_csv(tmp_path / "eval_trace.csv")
    assert set(trace["node"]) == {"O1"}
    assert "runs: 1" in (tmp_path / "summary.txt").read_text(encoding="utf-8")


def test_replay_compiled_run_file(tmp_path):
    run_file = tmp_path / "p01_interwoven.txt"
    assert main(["synth", "--script", "a8_outfit", "--compile-only", str(run_file)]) == 0
    out = tmp_path / "results"
    assert main(["replay", "--dataset", str(tmp_path), "--virtual", "--out", str(out)]) == 0
    recognitions = pd.read_csv(out / "recognitions.csv")
    assert recognitions["activity"].tolist() == [8]
    assert recognitions["run_id"].tolist() == ["p01_interwoven"]


@pytest.mark.parametrize(
    "argv",
    [
        ["synth", "--script", "no_such_script", "--virtual"],
        ["replay", "--dataset", "/nonexistent/casas", "--virtual"],
        ["replay", "--virtual", "--gap", "soon"],
    ],
)
def test_user_errors_exit_2(argv, tmp_path, capsys):
    assert main(argv + ["--out", str(tmp_path)]) == 2
    assert capsys.readouterr().err.startswith("fluentnet: ")


def test_unknown_command_exits():
    with pytest.raises(SystemExit):
        main(["train"])
