from pathlib import Path
from typing import List, Union

import pandas as pd

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:  # optional `plots` group
    plt = None


def render(out_dir: Union[str, Path]) -> List[Path]:
    """
    Render trace.png (four panels: complexity, evaluation time, propagated
    statements and recognitions over time) and scatter.png (evaluation time against
    complexity) from the CSVs in `out_dir`.
    """
    if plt is None:
        raise RuntimeError("plots need matplotlib: poetry install --with plots")
    out_dir = Path(out_dir)
    trace = pd.read_csv(out_dir / "eval_trace.csv")
    recognitions = pd.read_csv(out_dir / "recognitions.csv")

    fig, axes = plt.subplots(4, 1, sharex=True, figsize=(12, 10))
    for node, rows in trace.groupby("node"):
        axes[0].step(rows["time"] / 1000, rows["complexity"], where="post", label=node)
        axes[1].plot(rows["time"] / 1000, rows["duration"] / 1e6, ".", markersize=2, label=node)
        axes[2].plot(rows["time"] / 1000, rows["propagated"], ".", markersize=2, label=node)
    axes[3].plot(recognitions["recognized_at"] / 1000, recognitions["activity"], "*", markersize=10)
    axes[0].set_ylabel("complexity")
    axes[1].set_ylabel("evaluation [ms]")
    axes[2].set_ylabel("propagated")
    axes[3].set_ylabel("activity")
    axes[3].set_yticks(range(1, 9))
    axes[3].set_xlabel("timeline [s]")
    if not trace.empty:
        axes[0].legend(loc="upper right", fontsize="small", ncol=5)
    fig.tight_layout()
    trace_path = out_dir / "trace.png"
    fig.savefig(trace_path, dpi=120)
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(6, 5))
    ax.scatter(trace["complexity"], trace["duration"] / 1e6, s=4)
    ax.set_xlabel("complexity")
    ax.set_ylabel("evaluation [ms]")
    fig.tight_layout()
    scatter_path = out_dir / "scatter.png"
    fig.savefig(scatter_path, dpi=120)
    plt.close(fig)
    return [trace_path, scatter_path]
