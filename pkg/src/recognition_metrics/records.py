import queue
from dataclasses import asdict, dataclass
from typing import List, Optional, Tuple


@dataclass(frozen=True)
class RecognitionRecord:
    activity: int
    recognized_at: int
    run_id: Optional[str] = None
    detected_at: Optional[int] = None
    wall_time: Optional[float] = None
    matched_label_window: Optional[Tuple[int, int]] = None

    def to_row(self) -> dict:
        row = asdict(self)
        window = row.pop("matched_label_window")
        row["window_start"], row["window_end"] = window if window else (None, None)
        return row


@dataclass(frozen=True)
class EvalSample:
    node: str
    at: int
    eval_duration_ns: int
    complexity: int
    propagated: int = 0

    def __post_init__(self):
        if min(self.at, self.eval_duration_ns, self.complexity, self.propagated) < 0:
            raise ValueError(f"EvalSample fields must be non-negative: {self}")


class MetricsRecorder:
    """
    Single writer for evaluation samples and recognitions.

    Producers (procedures running in worker threads) put onto a queue; the
    owner drains it into the ordered lists.
    """

    def __init__(self) -> None:
        self._channel: "queue.SimpleQueue" = queue.SimpleQueue()
        self._samples: List[EvalSample] = []
        self._records: List[RecognitionRecord] = []

    def put(self, item) -> None:
        self._channel.put(item)

    def drain(self) -> None:
        while True:
            try:
                item = self._channel.get_nowait()
            except queue.Empty:
                return
            if isinstance(item, EvalSample):
                self._samples.append(item)
            else:
                self._records.append(item)

    @property
    def samples(self) -> List[EvalSample]:
        self.drain()
        return sorted(self._samples, key=lambda s: (s.node, s.at))

    @property
    def records(self) -> List[RecognitionRecord]:
        self.drain()
        return sorted(self._records, key=lambda r: (r.recognized_at, r.activity))
