import pytest
from fastapi.testclient import TestClient

from src.recognition_metrics import EvalSample, LabelWindow, RecognitionRecord, export
from src.services.fluentnet_api import app

client = TestClient(app)

WINDOWS = [LabelWindow("a1_medication", 1, 0, 53_000), LabelWindow("a4_phone", 4, 233_000, 282_000)]
RECORDS = [
    RecognitionRecord(1, 49_000, "a1_medication", detected_at=49_500, wall_time=49.5),
    RecognitionRecord(6, 250_000, "a4_phone", detected_at=250_500, wall_time=250.5),
]
SAMPLES = [EvalSample("O0", 0, 12_000, 31, 3), EvalSample("O1", 500, 40_000, 9, 6)]


@pytest.fixture(autouse=True)
def results_dir(tmp_path, monkeypatch):
    export(tmp_path, RECORDS, SAMPLES, WINDOWS)
    monkeypatch.setattr(app.state, "results_dir", tmp_path)
    return tmp_path


def test_root_and_health():
    """Verify the service answers on its root and reports a loaded results directory."""
    assert client.get("/fluentnet/").json()["status"] == "ok"
    assert client.get("/fluentnet/health").json() == {"status": "ok"}


def test_health_without_results(monkeypatch, tmp_path):
    """Health fails with the error envelope when the results directory is missing."""
    monkeypatch.setattr(app.state, "results_dir", tmp_path / "missing")
    response = client.get("/fluentnet/health")
    assert response.status_code == 500
    assert response.json() == {"errors": [{"code": 500, "detail": "No results directory loaded"}]}


def test_get_recognitions():
    """Every exported recognition is returned with its outcome and matched window."""
    response = client.get("/fluentnet/recognitions")
    assert response.status_code == 200
    data = response.json()
    assert [(r["activity"], r["outcome"]) for r in data] == [(1, "true_positive"), (6, "misclassified")]
    assert (data[0]["window_start"], data[0]["window_end"]) == (0, 53_000)
    assert data[1]["window_start"] is None


@pytest.mark.parametrize(
    "query, expected",
    [
        ("activity=1", [1]),
        ("activity=4", []),
        ("outcome=misclassified", [6]),
        ("activity=6&outcome=true_positive", []),
    ],
)
def test_filter_recognitions(query, expected):
    """Activity and outcome filters restrict the returned recognitions."""
    response = client.get(f"/fluentnet/recognitions?{query}")
    assert response.status_code == 200
    assert [r["activity"] for r in response.json()] == expected


@pytest.mark.parametrize("query", ["activity=0", "activity=9", "activity=x", "outcome=late"])
def test_invalid_recognition_filters(query):
    """Out-of-range or unknown filters give 422 in the error envelope."""
    response = client.get(f"/fluentnet/recognitions?{query}")
    assert response.status_code == 422
    (error,) = response.json()["errors"]
    assert error["code"] == 422
    assert isinstance(error["detail"], list)


def test_get_rates():
    """Rates cover the eight activities; activities without windows have null rates."""
    data = client.get("/fluentnet/rates").json()
    assert [r["activity"] for r in data] == list(range(1, 9))
    assert data[0]["true_positive"] == 100.0
    assert data[3]["misclassified"] == 100.0
    assert data[1]["true_positive"] is None
    assert data[0]["baseline"] == 65.6


def test_get_delays():
    """Delays are reported per activity; an early recognition is not late."""
    data = client.get("/fluentnet/delays").json()
    assert data[0] == {"activity": 1, "matched": 1, "late": 0, "worst_ms": 0, "average_ms": 0.0}


def test_get_trace():
    """The trace of one node is returned; the placing node is the default."""
    default = client.get("/fluentnet/trace").json()
    assert [(r["node"], r["complexity"]) for r in default] == [("O0", 31)]
    o1 = client.get("/fluentnet/trace?node=O1").json()
    assert o1 == [{"node": "O1", "time": 500, "duration": 40_000, "complexity": 9, "propagated": 6}]


def test_trace_unknown_node():
    """Verify API returns 404 for a node absent from the trace."""
    response = client.get("/fluentnet/trace?node=O9")
    assert response.status_code == 404
    assert response.json()["errors"][0]["detail"] == "Node 'O9' not found in trace"


@pytest.mark.parametrize("path", ["/fluentnet/recognitions", "/fluentnet/rates", "/fluentnet/delays", "/fluentnet/trace"])
def test_missing_results(monkeypatch, tmp_path, path):
    """Verify API returns 404 when nothing was exported."""
    empty = tmp_path / "empty"
    empty.mkdir()
    monkeypatch.setattr(app.state, "results_dir", empty)
    response = client.get(path)
    assert response.status_code == 404
    assert response.json()["errors"][0]["code"] == 404


# python -m pytest -v
