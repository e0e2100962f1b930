import logging
from typing import Optional

from src.network import Procedure, Registry, implementation
from src.recognition_metrics import RecognitionRecord
from src.statements import Timestamp

logger = logging.getLogger("fluentnet.activities")

RECOGNIZED = "Recognized"


@implementation("importer")
def importer_run(kb: Registry, procedure: Procedure, now: Timestamp) -> int:
    """
    Copy the relevant statements of the placing node into the model node and evaluate it.

    Only statements newer than the model node's last reset and not already present are
    copied. The node is evaluated even when nothing was copied, so dwell times advance.
    Returns the number of statements propagated.
    """
    params = procedure.params
    source = kb.node(params["source"])
    target = kb.node(params["target"])
    names = set(params.get("relevant_names", ()))
    tags = set(params.get("relevant_tags", ()))

    with source.lock:
        snapshot = source.store.snapshot()
    selected = [
        st
        for st in snapshot.query()
        if (st.name in names or st.tags & tags) and (target.reset_at is None or st.time > target.reset_at)
    ]

    with target.evaluation_pass() as store:
        fresh = [st for st in selected if not store.contains_key(st)]
        for st in fresh:
            store.insert(st)
        satisfied, _ = target.evaluate(now, propagated=len(fresh))
    if fresh:
        logger.debug(f"{procedure.id}: {len(fresh)} statement(s) {source.id} -> {target.id} at {now}")
    if satisfied:
        logger.info(f"{procedure.id}: model of {target.id} satisfied at {now}")
    return len(fresh)


@implementation("detector")
def detector_run(kb: Registry, procedure: Procedure, now: Timestamp) -> Optional[RecognitionRecord]:
    """
    Report the recognition held by the model node, then remove all of its statements.
    Returns None (and leaves the node alone) when there is nothing recognized.
    """
    params = procedure.params
    node = kb.node(params["target"])
    with node.evaluation_pass() as store:
        hits = store.query(tag=RECOGNIZED)
        if not hits:
            return None
        record = RecognitionRecord(
            activity=int(params["activity"]),
            recognized_at=hits[0].time,
            detected_at=now,
            wall_time=kb.wall_clock(),
        )
        node.reset(now)
        node.record_sample(now, 0)
    kb.recorder.put(record)
    logger.info(f"{procedure.id}: activity {record.activity} recognized at {record.recognized_at} (tick {now})")
    return record
