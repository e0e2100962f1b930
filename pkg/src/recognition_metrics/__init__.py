"""
recognition_metrics records recognitions and evaluation samples and scores them against labels
"""

from .records import EvalSample, MetricsRecorder, RecognitionRecord
from .scoring import BASELINE_RATES, LabelWindow, delay_stats, match_records, score
from .export import export

__all__ = [
    "EvalSample",
    "MetricsRecorder",
    "RecognitionRecord",
    "BASELINE_RATES",
    "LabelWindow",
    "delay_stats",
    "match_records",
    "score",
    "export",
]
