import asyncio
import logging
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from data.casas import Run
from src.recognition_metrics import score
from src.replay import DEFAULT_IDLE_MS, VirtualClock, build_pipeline, build_plan, run_replay

logger = logging.getLogger("fluentnet.calibrate")


def threshold_grid(default_ms: int, points: int = 7, span: float = 4.0) -> List[int]:
    """`points` values spread geometrically from default/span to default*span, rounded to whole seconds."""
    grid = np.geomspace(default_ms / span, default_ms * span, num=points)
    seconds = np.unique(np.maximum(1, np.round(grid / 1000)).astype(np.int64))
    return [int(s) * 1000 for s in seconds]


def calibrate(
    runs: Sequence[Run],
    network: Union[str, Path, None] = None,
    activities: Optional[Iterable[int]] = None,
    points: int = 7,
    span: float = 4.0,
    gap_ms: int = 3 * 60_000,
    grace_ms: int = 60_000,
    seed: int = 0,
    idle_ms: int = DEFAULT_IDLE_MS,
) -> pd.DataFrame:
    """
    Sweep each model threshold over a geometric grid and score the activity on the labelled runs.

    Only the swept activity is installed for a sweep point, so other models cannot
    interfere. Returns one row per (activity, threshold, value) with the activity's
    true-positive, unknown and misclassified rates.
    """
    plan = build_plan(runs, gap=gap_ms, seed=seed)
    windows = plan.label_windows()
    reference = build_pipeline(network, activities=activities)
    rows = []
    for package in reference.packages:
        for name, default in sorted(package.model.thresholds.items()):
            for value in threshold_grid(default, points, span):
                pipeline = build_pipeline(
                    network, thresholds={package.index: {name: value}}, activities=[package.index], idle_ms=idle_ms
                )
                report = asyncio.run(run_replay(plan, pipeline, VirtualClock()))
                rates = score(report.records, windows, grace_ms).loc[package.index]
                rows.append(
                    {
                        "activity": package.index,
                        "threshold": name,
                        "value_ms": value,
                        "default_ms": default,
                        "true_positive": rates["true_positive"],
                        "unknown": rates["unknown"],
                        "misclassified": rates["misclassified"],
                        "recognitions": len(report.records),
                    }
                )
            logger.info(f"Swept {name} of activity {package.index} over {points} value(s)")
    return pd.DataFrame(
        rows,
        columns=["activity", "threshold", "value_ms", "default_ms", "true_positive", "unknown", "misclassified", "recognitions"],
    )


def write_calibration(df: pd.DataFrame, out_dir: Union[str, Path]) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "calibration.csv"
    df.to_csv(path, index=False)
    best = df.sort_values(["activity", "threshold", "true_positive"], ascending=[True, True, False])
    for (activity, name), rows in best.groupby(["activity", "threshold"], sort=True):
        top = rows.iloc[0]
        logger.info(f"A{activity} {name}: best {top['value_ms']} ms ({top['true_positive']}% TP, default {top['default_ms']} ms)")
    return path
