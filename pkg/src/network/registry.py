import logging
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

from src.recognition_metrics.records import MetricsRecorder
from src.statements import WILDCARD, Policy, Provenance, Statement, Timestamp

from .node import Node

logger = logging.getLogger("fluentnet.registry")

CORE_NODE = "core"
NEW_CONDITION = "NewCondition"
OLD_CONDITION = "OldCondition"
CONDITION = "Condition"
# reserved tag of synchronization statements: one procedure writes them, another waits on them
SEMAPHORE = "Semaphore"


class RegistryError(ValueError):
    """Raised for unknown nodes, unknown implementations and malformed registrations."""


@dataclass(eq=False)
class Condition:
    """
    Existence query `(node, name, tag)` polled `frequency` times per second.

    Conditions with equal keys are one shared condition in a Registry.
    """

    node: str
    name: str = WILDCARD
    tag: Optional[str] = None
    frequency: int = 2
    state: bool = False
    polls: int = 0

    def __post_init__(self):
        if not self.node:
            raise RegistryError("Condition node must be non-empty")
        if self.frequency < 1:
            raise RegistryError(f"Condition frequency must be >= 1 Hz, got {self.frequency}")

    @property
    def key(self) -> str:
        return f"{self.node}/{self.name}#{self.tag or ''}@{self.frequency}"

    @property
    def period_ms(self) -> int:
        return max(1, 1000 // self.frequency)


@dataclass(eq=False)
class Event:
    """Conjunction of conditions; `consumed` events wait for a fresh poll before rising again."""

    conditions: List[Condition]
    state: bool = False
    consumed: bool = False

    def holds(self) -> bool:
        return all(c.state for c in self.conditions)


@dataclass(eq=False)
class Procedure:
    id: str
    implementation_id: str
    events: List[Event]
    params: Dict[str, Any] = field(default_factory=dict)
    rearm: bool = False
    dispatches: int = 0

    def runnable(self) -> bool:
        return any(e.state for e in self.events)


@dataclass
class Evaluator:
    condition: Condition
    next_due: Timestamp


Implementation = Callable[["Registry", Procedure, Timestamp], Any]

_IMPLEMENTATIONS: Dict[str, Implementation] = {}


def implementation(implementation_id: str):
    """Register a procedure body under `implementation_id`."""

    def decorator(fn: Implementation) -> Implementation:
        _IMPLEMENTATIONS[implementation_id] = fn
        return fn

    return decorator


def resolve_implementation(implementation_id: str) -> Implementation:
    try:
        return _IMPLEMENTATIONS[implementation_id]
    except KeyError:
        raise RegistryError(f"unknown implementation '{implementation_id}'") from None


def implementations() -> List[str]:
    return sorted(_IMPLEMENTATIONS)


class Registry:
    """
    The knowledge base: nodes, shared conditions, procedures and the condition evaluators.

    Condition lifecycle is recorded in the `core` node as `NewCondition` / `OldCondition`
    statements; `scheduler.core_manager` turns them into evaluators.
    """

    def __init__(self, recorder: Optional[MetricsRecorder] = None) -> None:
        self.recorder = recorder or MetricsRecorder()
        self.nodes: Dict[str, Node] = {}
        self.conditions: Dict[str, Condition] = {}
        self.procedures: Dict[str, Procedure] = {}
        self.evaluators: Dict[str, Evaluator] = {}
        self.failures: List[Tuple[str, Timestamp, str]] = []
        self.clock: Timestamp = 0
        # seconds since start; the replay driver swaps in its clock
        self.wall_clock: Callable[[], float] = time.monotonic
        self.register_node(Node(CORE_NODE, Policy.OVERWRITE))

    @property
    def core(self) -> Node:
        return self.nodes[CORE_NODE]

    # -------------------------
    # NODES
    # -------------------------
    def register_node(self, node: Node) -> "Registry":
        if node.id in self.nodes:
            raise RegistryError(f"node '{node.id}' already registered")
        if node.recorder is None:
            node.recorder = self.recorder
        self.nodes[node.id] = node
        logger.info(f"Registered node {node.id} ({node.store.policy.value}, {len(node.models)} model(s))")
        return self

    def node(self, node_id: str) -> Node:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise RegistryError(f"unknown node '{node_id}'") from None

    # -------------------------
    # CONDITIONS
    # -------------------------
    def _mark(self, key: str, tag: str) -> None:
        core = self.core
        with core.evaluation_pass() as store:
            store.insert(Statement(key, True, self.clock, frozenset({tag}), Provenance.PROCEDURE))

    def register_condition(self, condition: Condition) -> Condition:
        """Intern `condition`; returns the shared instance for its key."""
        self.node(condition.node)
        shared = self.conditions.get(condition.key)
        if shared is not None:
            return shared
        self.conditions[condition.key] = condition
        self._mark(condition.key, NEW_CONDITION)
        return condition

    def _referenced(self, key: str) -> bool:
        return any(c.key == key for p in self.procedures.values() for e in p.events for c in e.conditions)

    def deregister_condition(self, key: str) -> None:
        if key not in self.conditions:
            raise RegistryError(f"unknown condition '{key}'")
        if self._referenced(key):
            raise RegistryError(f"condition '{key}' is still used by a procedure")
        del self.conditions[key]
        self._mark(key, OLD_CONDITION)

    # -------------------------
    # SEMAPHORES
    # -------------------------
    def signal(self, node_id: str, name: str, now: Timestamp) -> Statement:
        """Write semaphore `name` into `node_id`; `Condition(node_id, name, SEMAPHORE)` sees it at its next poll."""
        st = Statement(name, True, now, frozenset({SEMAPHORE}), Provenance.PROCEDURE)
        with self.node(node_id).evaluation_pass() as store:
            store.insert(st)
        return st

    def release(self, node_id: str, name: str) -> None:
        with self.node(node_id).evaluation_pass() as store:
            store.remove(name)

    # -------------------------
    # PROCEDURES
    # -------------------------
    def register_procedure(self, procedure: Procedure) -> Procedure:
        if procedure.id in self.procedures:
            raise RegistryError(f"procedure '{procedure.id}' already registered")
        resolve_implementation(procedure.implementation_id)
        if not procedure.events or any(not e.conditions for e in procedure.events):
            raise RegistryError(f"procedure '{procedure.id}' needs at least one event of at least one condition")
        for event in procedure.events:
            event.conditions = [self.register_condition(c) for c in event.conditions]
        self.procedures[procedure.id] = procedure
        logger.info(
            f"Registered procedure {procedure.id} -> {procedure.implementation_id} "
            f"({len(procedure.events)} event(s), rearm={procedure.rearm})"
        )
        return procedure

    def deregister_procedure(self, procedure_id: str) -> Procedure:
        try:
            procedure = self.procedures.pop(procedure_id)
        except KeyError:
            raise RegistryError(f"unknown procedure '{procedure_id}'") from None
        for key in {c.key for e in procedure.events for c in e.conditions}:
            if not self._referenced(key):
                self.deregister_condition(key)
        return procedure

    def events_of(self, key: str) -> List[Tuple[Procedure, Event]]:
        return [
            (p, e)
            for p in self.procedures.values()
            for e in p.events
            if any(c.key == key for c in e.conditions)
        ]

    def tick_period(self, default_ms: int = 500) -> int:
        """Shortest polling period among registered conditions."""
        return min((c.period_ms for c in self.conditions.values()), default=default_ms)

    def __repr__(self) -> str:
        return (
            f"Registry(nodes={len(self.nodes)}, conditions={len(self.conditions)}, "
            f"procedures={len(self.procedures)}, evaluators={len(self.evaluators)})"
        )
