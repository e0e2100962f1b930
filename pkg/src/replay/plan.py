import bisect
import random
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Sequence

from data.casas import Run
from src.recognition_metrics import LabelWindow
from src.statements import Provenance, Statement, Timestamp


@dataclass(frozen=True)
class ReplayEvent:
    time: Timestamp
    run_id: str
    sensor_id: str
    value: bool
    label: Optional[int] = None

    def statement(self) -> Statement:
        return Statement(self.sensor_id, self.value, self.time, provenance=Provenance.SENSOR)


@dataclass
class ReplayPlan:
    """Runs laid out on a single timeline; run k+1 starts `gap` after run k ends."""

    runs: List[Run]
    gap: int = 3 * 60_000
    speed: float = 1.0
    seed: int = 0
    starts: List[Timestamp] = field(default_factory=list)

    def __post_init__(self):
        if not self.runs:
            raise ValueError("ReplayPlan needs at least one run")
        if self.speed <= 0:
            raise ValueError(f"speed must be positive, got {self.speed}")
        if self.gap < 0:
            raise ValueError(f"gap must be non-negative, got {self.gap}")
        if not self.starts:
            at = 0
            for run in self.runs:
                self.starts.append(at)
                at += run.duration_ms + self.gap

    @property
    def run_ids(self) -> List[str]:
        return [run.run_id for run in self.runs]

    @property
    def duration(self) -> Timestamp:
        return self.starts[-1] + self.runs[-1].duration_ms

    def events(self) -> Iterator[ReplayEvent]:
        for run, start in zip(self.runs, self.starts):
            for event in run.events:
                yield ReplayEvent(start + run.offset_ms(event), run.run_id, event.sensor_id, event.value, event.label)

    def run_at(self, t: Timestamp) -> Optional[str]:
        """Run whose span (including the following gap) holds `t`."""
        if t < 0:
            return None
        return self.runs[bisect.bisect_right(self.starts, t) - 1].run_id

    def label_windows(self) -> List[LabelWindow]:
        return [
            LabelWindow(run.run_id, activity, start + first, start + last)
            for run, start in zip(self.runs, self.starts)
            for activity, (first, last) in sorted(run.label_windows().items())
        ]


def build_plan(
    runs: Sequence[Run],
    gap: int = 3 * 60_000,
    seed: int = 0,
    speed: float = 1.0,
    shuffle: bool = True,
) -> ReplayPlan:
    """Concatenate the runs in a seeded random order on one timeline."""
    order = list(runs)
    if shuffle:
        random.Random(seed).shuffle(order)
    return ReplayPlan(order, gap, speed, seed)
