from dataclasses import dataclass, replace
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np
import pandas as pd

from .records import RecognitionRecord

ACTIVITIES = tuple(range(1, 9))

# true-positive rates published for the CASAS interwoven dataset
BASELINE_RATES = {1: 65.6, 2: 86.2, 3: 28.4, 4: 58.9, 5: 82.8, 6: 82.6, 7: 88.1, 8: 67.3}

TRUE_POSITIVE = "true_positive"
UNKNOWN = "unknown"
MISCLASSIFIED = "misclassified"


@dataclass(frozen=True)
class LabelWindow:
    run_id: str
    activity: int
    start: int
    end: int

    def holds(self, t: int, grace_ms: int) -> bool:
        return self.start <= t <= self.end + grace_ms


def _same_run(record: RecognitionRecord, window: LabelWindow) -> bool:
    return record.run_id is None or record.run_id == window.run_id


def match_records(
    records: Iterable[RecognitionRecord],
    windows: Sequence[LabelWindow],
    grace_ms: int = 60_000,
) -> Tuple[List[Tuple[RecognitionRecord, str]], Dict[LabelWindow, str]]:
    """
    Pair recognitions with label windows.

    A record is a true positive when it falls in a not yet matched window of its own
    activity and run (start <= t <= end + grace); the earliest-ending such window is
    taken. Every other record is misclassified. A window is true-positive when matched,
    misclassified when another activity's record falls in it, unknown otherwise.
    """
    matched: Dict[LabelWindow, RecognitionRecord] = {}
    outcomes: List[Tuple[RecognitionRecord, str]] = []
    for record in sorted(records, key=lambda r: (r.recognized_at, r.activity)):
        candidates = [
            w
            for w in windows
            if w.activity == record.activity
            and w not in matched
            and _same_run(record, w)
            and w.holds(record.recognized_at, grace_ms)
        ]
        if candidates:
            window = min(candidates, key=lambda w: (w.end, w.start))
            matched[window] = record
            outcomes.append((replace(record, matched_label_window=(window.start, window.end)), TRUE_POSITIVE))
        else:
            outcomes.append((record, MISCLASSIFIED))

    window_outcomes: Dict[LabelWindow, str] = {}
    for window in windows:
        if window in matched:
            window_outcomes[window] = TRUE_POSITIVE
        elif any(
            r.activity != window.activity and _same_run(r, window) and window.holds(r.recognized_at, grace_ms)
            for r, _ in outcomes
        ):
            window_outcomes[window] = MISCLASSIFIED
        else:
            window_outcomes[window] = UNKNOWN
    return outcomes, window_outcomes


def score(
    records: Iterable[RecognitionRecord],
    windows: Sequence[LabelWindow],
    grace_ms: int = 60_000,
) -> pd.DataFrame:
    """
    Per-activity recognition table.

    Returns:
        pd.DataFrame indexed 1..8 with columns:
            - windows:                labelled windows of the activity
            - true_positive:          % of windows recognized (unrounded; the three rates sum to 100)
            - unknown:                % of windows with no recognition
            - misclassified:          % of windows holding only another activity's recognition
            - tp_records:             recognitions counted as true positive
            - misclassified_records:  recognitions matching no window of their activity
            - baseline:               true-positive rate published for the CASAS interwoven dataset
    """
    outcomes, window_outcomes = match_records(records, windows, grace_ms)
    rows = []
    for activity in ACTIVITIES:
        states = [o for w, o in window_outcomes.items() if w.activity == activity]
        total = len(states)

        def pct(outcome: str) -> float:
            return 100.0 * states.count(outcome) / total if total else np.nan

        rows.append(
            {
                "activity": activity,
                "windows": total,
                TRUE_POSITIVE: pct(TRUE_POSITIVE),
                UNKNOWN: pct(UNKNOWN),
                MISCLASSIFIED: pct(MISCLASSIFIED),
                "tp_records": sum(1 for r, o in outcomes if r.activity == activity and o == TRUE_POSITIVE),
                "misclassified_records": sum(1 for r, o in outcomes if r.activity == activity and o == MISCLASSIFIED),
                "baseline": BASELINE_RATES[activity],
            }
        )
    return pd.DataFrame(rows).set_index("activity")


def delay_stats(
    records: Iterable[RecognitionRecord],
    windows: Sequence[LabelWindow],
    grace_ms: int = 60_000,
) -> pd.DataFrame:
    """
    Compute the notification delay of true-positive recognitions, per activity.

    The delay of a recognition is measured from the end of the label window it matched,
    i.e. from the last annotated event of the activity.

    Parameters
    ----------
    records : iterable of RecognitionRecord
        Recognitions of one replay.
    windows : sequence of LabelWindow
        Labelled activity windows on the same timeline.
    grace_ms : int, optional
        How long after a window end a recognition still matches it (default is 60000).

    Returns
    -------
    pd.DataFrame
        Indexed by activity, with `matched`, `late`, `worst_ms` and `average_ms`.

    Notes
    -----
    - delay = max(0, recognized_at - window end); early recognitions count as on time.
    - The average is taken over late notifications only; it is 0 when none is late.
    - Unmatched recognitions and windows without a recognition are left out.
    """
    outcomes, _ = match_records(records, windows, grace_ms)
    rows = []
    for activity in ACTIVITIES:
        delays = np.array(
            [
                max(0, r.recognized_at - r.matched_label_window[1])
                for r, o in outcomes
                if r.activity == activity and o == TRUE_POSITIVE
            ],
            dtype=np.int64,
        )
        late = delays[delays > 0]
        rows.append(
            {
                "activity": activity,
                "matched": int(delays.size),
                "late": int(late.size),
                "worst_ms": int(delays.max()) if delays.size else 0,
                "average_ms": float(np.round(late.mean(), 1)) if late.size else 0.0,
            }
        )
    return pd.DataFrame(rows).set_index("activity")

