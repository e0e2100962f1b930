import logging
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Union

import pandas as pd

from .records import EvalSample, RecognitionRecord
from .scoring import BASELINE_RATES, LabelWindow, delay_stats, match_records, score

logger = logging.getLogger("fluentnet.metrics")

RECOGNITION_COLUMNS = [
    "activity",
    "recognized_at",
    "run_id",
    "detected_at",
    "wall_time",
    "window_start",
    "window_end",
    "outcome",
]
TRACE_COLUMNS = ["node", "time", "duration", "complexity", "propagated"]


class ExportError(OSError):
    """Raised when the output directory cannot be written."""


def recognitions_frame(
    records: Iterable[RecognitionRecord],
    windows: Sequence[LabelWindow],
    grace_ms: int,
) -> pd.DataFrame:
    outcomes, _ = match_records(records, windows, grace_ms)
    rows = [{**record.to_row(), "outcome": outcome} for record, outcome in outcomes]
    df = pd.DataFrame(rows, columns=RECOGNITION_COLUMNS)
    for column in ("window_start", "window_end", "detected_at"):
        df[column] = df[column].astype("Int64")
    return df


def trace_frame(samples: Iterable[EvalSample], node: Optional[str] = None) -> pd.DataFrame:
    rows = [
        {
            "node": s.node,
            "time": s.at,
            "duration": s.eval_duration_ns,
            "complexity": s.complexity,
            "propagated": s.propagated,
        }
        for s in samples
        if node is None or s.node == node
    ]
    df = pd.DataFrame(rows, columns=TRACE_COLUMNS)
    return df.sort_values(["node", "time"], kind="stable").reset_index(drop=True)


def _summary(rates: pd.DataFrame, delays: pd.DataFrame, totals: Dict[str, object]) -> str:
    lines = [f"{key}: {value}" for key, value in totals.items()]
    lines.append("")
    table = rates.join(delays[["late", "worst_ms", "average_ms"]])
    lines.append(table.round(1).to_string(na_rep="-"))
    lines.append("")
    lines.append("baseline: true-positive % published for the CASAS interwoven dataset")
    lines.append(", ".join(f"A{k}={v}" for k, v in BASELINE_RATES.items()))
    return "\n".join(lines) + "\n"


def export(
    out_dir: Union[str, Path],
    records: Iterable[RecognitionRecord],
    samples: Iterable[EvalSample],
    windows: Sequence[LabelWindow] = (),
    grace_ms: int = 60_000,
    node: Optional[str] = None,
    totals: Optional[Dict[str, object]] = None,
    plots: bool = False,
) -> List[Path]:
    """
    Write recognitions.csv, rates.csv, delays.csv, eval_trace.csv and summary.txt to `out_dir`.

    `node` restricts eval_trace.csv to one node. With `plots`, the trace and the
    time-versus-complexity scatter are rendered from the written CSVs.
    Returns the written paths.
    """
    out_dir = Path(out_dir)
    records = list(records)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        recognitions = recognitions_frame(records, windows, grace_ms)
        rates = score(records, windows, grace_ms)
        delays = delay_stats(records, windows, grace_ms)
        trace = trace_frame(samples, node)

        paths = {
            "recognitions": out_dir / "recognitions.csv",
            "rates": out_dir / "rates.csv",
            "delays": out_dir / "delays.csv",
            "eval_trace": out_dir / "eval_trace.csv",
            "summary": out_dir / "summary.txt",
        }
        recognitions.to_csv(paths["recognitions"], index=False)
        rates.to_csv(paths["rates"])
        delays.to_csv(paths["delays"])
        trace.to_csv(paths["eval_trace"], index=False)
        summary_totals = {"recognitions": len(records), "windows": len(windows), **(totals or {})}
        paths["summary"].write_text(_summary(rates, delays, summary_totals), encoding="utf-8")
    except OSError as e:
        raise ExportError(f"cannot write results to {out_dir}: {e}") from None

    written = list(paths.values())
    if plots:
        from .plots import render

        written += render(out_dir)
    logger.info(f"Exported {len(records)} recognition(s) and {len(trace)} trace row(s) to {out_dir}")
    return written
