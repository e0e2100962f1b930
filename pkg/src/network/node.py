import logging
import threading
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Tuple

from src.recognition_metrics.records import EvalSample, MetricsRecorder
from src.rules import Model, evaluate_model
from src.statements import Policy, Statement, StatementStore, TagRule, classify

logger = logging.getLogger("fluentnet.node")


@dataclass
class NodeMetrics:
    complexity: int = 0
    last_eval_ns: int = 0
    eval_history: List[EvalSample] = field(default_factory=list)


class Node:
    """
    An isolated statement store with its own tag rules and models.

    Complexity = statements + tag assertions + model rules + tag rules; the last two
    form the baseline a reset node returns to.
    """

    def __init__(
        self,
        id: str,
        policy: Policy = Policy.APPEND,
        models: Iterable[Model] = (),
        tag_rules: Iterable[TagRule] = (),
        recorder: Optional[MetricsRecorder] = None,
    ) -> None:
        if not id:
            raise ValueError("Node id must be non-empty")
        self.id = id
        self.store = StatementStore(policy)
        self.models: List[Model] = list(models)
        self.tag_rules: List[TagRule] = list(tag_rules)
        self.recorder = recorder
        self.lock = threading.Lock()
        self.evaluating = False
        self.reset_at: Optional[int] = None
        self.metrics = NodeMetrics()
        self.refresh_metrics()

    @property
    def baseline(self) -> int:
        return sum(len(m.rules) for m in self.models) + len(self.tag_rules)

    def complexity(self) -> int:
        return len(self.store) + self.store.tag_assertions() + self.baseline

    def refresh_metrics(self) -> int:
        self.metrics.complexity = self.complexity()
        return self.metrics.complexity

    @contextmanager
    def evaluation_pass(self):
        """Hold the single-writer lock; condition polls are deferred meanwhile."""
        with self.lock:
            self.evaluating = True
            try:
                yield self.store
            finally:
                self.evaluating = False
                self.refresh_metrics()

    def evaluate(self, clock: int, propagated: int = 0) -> Tuple[bool, List[Statement]]:
        """
        Classify, run every model to its fixpoint, classify the derived statements,
        and record an EvalSample. Caller holds the evaluation pass.
        """
        started = time.perf_counter_ns()
        satisfied = False
        derived: List[Statement] = []
        classify(self.store, self.tag_rules)
        for model in self.models:
            ok, new = evaluate_model(model, self.store, clock)
            satisfied = satisfied or ok
            derived.extend(new)
        classify(self.store, self.tag_rules)
        elapsed = time.perf_counter_ns() - started
        self.record_sample(clock, elapsed, propagated)
        return satisfied, derived

    def record_sample(self, clock: int, elapsed_ns: int, propagated: int = 0) -> EvalSample:
        sample = EvalSample(self.id, clock, elapsed_ns, self.refresh_metrics(), propagated)
        self.metrics.last_eval_ns = elapsed_ns
        self.metrics.eval_history.append(sample)
        if self.recorder is not None:
            self.recorder.put(sample)
        return sample

    def reset(self, clock: int) -> None:
        """Remove every statement; tag rules and models stay. Caller holds the evaluation pass."""
        self.store.clear()
        self.reset_at = clock
        self.refresh_metrics()
        logger.debug(f"Node {self.id} reset at {clock}, complexity {self.metrics.complexity}")

    def __repr__(self) -> str:
        return f"Node(id={self.id!r}, policy={self.store.policy.value}, size={len(self.store)})"
