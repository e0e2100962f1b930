import asyncio
import logging
from dataclasses import dataclass
from typing import Any, List, Optional, Set, Tuple

from src.statements import Provenance, Statement, Timestamp

from .registry import (
    CONDITION,
    NEW_CONDITION,
    OLD_CONDITION,
    Condition,
    Evaluator,
    Procedure,
    Registry,
    resolve_implementation,
)

logger = logging.getLogger("fluentnet.scheduler")


class PollDeferred(RuntimeError):
    """The condition's node is in an evaluation pass; poll again next tick."""


@dataclass(frozen=True)
class Execution:
    procedure: str
    at: Timestamp
    ok: bool
    result: Any = None
    error: Optional[str] = None


def evaluate_condition(condition: Condition, kb: Registry) -> bool:
    """True iff at least one statement of the node matches (name, tag). State and time are not inspected."""
    node = kb.node(condition.node)
    if node.evaluating:
        raise PollDeferred(condition.key)
    return node.store.exists(condition.name, condition.tag)


def runnable(kb: Registry) -> Set[Procedure]:
    return {p for p in kb.procedures.values() if p.runnable()}


def core_manager(kb: Registry, now: Timestamp) -> Tuple[List[str], List[str]]:
    """
    Start an evaluator per `NewCondition` and stop one per `OldCondition` recorded in the core node.
    Started conditions are re-classified as plain `Condition`.
    """
    started: List[str] = []
    stopped: List[str] = []
    core = kb.core
    with core.evaluation_pass() as store:
        for st in store.query(tag=NEW_CONDITION):
            condition = kb.conditions.get(st.name)
            if condition is not None:
                evaluator = kb.evaluators.get(st.name)
                if evaluator is None:
                    kb.evaluators[st.name] = Evaluator(condition, next_due=now)
                    started.append(st.name)
                else:
                    # re-registered before its evaluator was stopped
                    evaluator.condition = condition
            store.insert(Statement(st.name, True, now, frozenset({CONDITION}), Provenance.PROCEDURE))
        for st in store.query(tag=OLD_CONDITION):
            if kb.evaluators.pop(st.name, None) is not None:
                stopped.append(st.name)
            store.remove(st.name)
    for key in started:
        logger.info(f"Started evaluator {key}")
    for key in stopped:
        logger.info(f"Stopped evaluator {key}")
    return started, stopped


def _poll(kb: Registry, now: Timestamp) -> Tuple[List[str], Set[str]]:
    changed: List[str] = []
    polled: Set[str] = set()
    for key in sorted(kb.evaluators):
        evaluator = kb.evaluators[key]
        if evaluator.next_due > now:
            continue
        condition = evaluator.condition
        try:
            value = evaluate_condition(condition, kb)
        except PollDeferred:
            logger.debug(f"Deferred poll of {key} at {now}")
            continue
        condition.polls += 1
        polled.add(key)
        evaluator.next_due += condition.period_ms
        if evaluator.next_due <= now:
            evaluator.next_due = now + condition.period_ms
        if value != condition.state:
            condition.state = value
            changed.append(key)
    return changed, polled


def _rising(kb: Registry, changed: List[str], polled: Set[str]) -> List[Procedure]:
    touched = {}
    for key in changed:
        for procedure, event in kb.events_of(key):
            touched[id(event)] = (procedure, event)
    for procedure in kb.procedures.values():
        for event in procedure.events:
            if event.consumed and any(c.key in polled for c in event.conditions):
                touched[id(event)] = (procedure, event)

    dispatch = {}
    for procedure, event in touched.values():
        value = event.holds()
        if value and not event.state:
            dispatch[procedure.id] = procedure
        event.state = value
        event.consumed = False
    return [dispatch[pid] for pid in sorted(dispatch)]


async def _execute(kb: Registry, procedure: Procedure, now: Timestamp) -> Execution:
    procedure.dispatches += 1
    fn = resolve_implementation(procedure.implementation_id)
    try:
        result = await asyncio.to_thread(fn, kb, procedure, now)
        execution = Execution(procedure.id, now, True, result=result)
    except Exception as e:
        logger.error(f"Procedure {procedure.id} failed at {now}: {e}")
        kb.failures.append((procedure.id, now, str(e)))
        execution = Execution(procedure.id, now, False, error=str(e))
    if procedure.rearm:
        for event in procedure.events:
            if event.state:
                event.state = False
                event.consumed = True
    return execution


async def scheduler_tick(kb: Registry, now: Timestamp) -> List[Execution]:
    """
    One scheduling step at timeline instant `now`.

    Applies pending condition lifecycle changes, polls the conditions that are due,
    recomputes the events they feed, and runs every procedure with an event that
    turned true. Procedures run concurrently in worker threads; one that raises is
    logged and the others still run.
    """
    kb.clock = now
    core_manager(kb, now)
    changed, polled = _poll(kb, now)
    dispatch = _rising(kb, changed, polled)
    if not dispatch:
        return []
    logger.debug(f"Tick {now}: dispatching {[p.id for p in dispatch]}")
    return list(await asyncio.gather(*(_execute(kb, p, now) for p in dispatch)))
