import logging
import time
from typing import Iterable, List

from src.network import Node
from src.statements import Policy, Provenance, Statement, classify

from .topology import LOCATION, Topology

logger = logging.getLogger("fluentnet.placing")


def _belief(name: str, state: bool, at: int) -> Statement:
    tags = {LOCATION, name} if state else {LOCATION}
    return Statement(name, state, at, frozenset(tags), Provenance.DERIVED)


def contextualize(topology: Topology, st: Statement) -> List[Statement]:
    """
    The sensor statement tagged with its kind, followed by the ⊤ location beliefs it supports.

    Motion ⊥ readings carry no location. Unknown sensors are dropped with a warning.
    """
    if st.name not in topology.sensors:
        logger.warning(f"Unknown sensor {st.name} at {st.time}, statement dropped")
        return []
    raw = st.with_tags({topology.kind_tag(st.name)})
    if topology.sensors[st.name].kind == "M" and not st.state:
        return [raw]
    return [raw] + [_belief(name, True, st.time) for name in topology.beliefs_of(st.name)]


def ingest(node: Node, statements: Iterable[Statement], topology: Topology) -> Node:
    """
    Memory-free ingestion into the placing node.

    Each reading overwrites its sensor's statement, asserts its location beliefs and
    turns ⊥ the beliefs it contradicts. Readings older than the stored one are ignored.
    No temporal reasoning happens here; only tag classification is re-run.
    """
    if node.store.policy is not Policy.OVERWRITE:
        raise ValueError(f"placing node {node.id} must use the overwrite policy")
    statements = list(statements)
    if not statements:
        return node

    started = time.perf_counter_ns()
    inserted = 0
    with node.evaluation_pass() as store:
        for st in statements:
            current = store.latest(st.name)
            if current is not None and current.time > st.time:
                logger.debug(f"Stale reading {st.dump()} ignored")
                continue
            produced = contextualize(topology, st)
            if not produced:
                continue
            for name in sorted(topology.expired_by(st.name)):
                belief = store.latest(name)
                if belief is not None and belief.state:
                    store.insert(_belief(name, False, st.time))
            for out in produced:
                store.insert(out)
            inserted += 1
        classify(store, node.tag_rules)
    node.record_sample(statements[-1].time, time.perf_counter_ns() - started, inserted)
    return node
