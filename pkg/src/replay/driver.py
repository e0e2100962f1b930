import asyncio
import logging
import time
from dataclasses import dataclass, field
from typing import Any, Callable, List, Optional, Protocol

from src.network import Registry, scheduler_tick
from src.recognition_metrics import EvalSample, RecognitionRecord
from src.statements import Statement, Timestamp

from .plan import ReplayEvent, ReplayPlan

logger = logging.getLogger("fluentnet.replay")


class Clock(Protocol):
    speed: float

    async def advance_to(self, timeline_ms: Timestamp) -> None: ...

    def elapsed(self) -> float: ...


class WallClock:
    """Sleeps so that timeline instant t is reached t / speed seconds after the first advance."""

    def __init__(self, speed: float = 1.0) -> None:
        if speed <= 0:
            raise ValueError(f"speed must be positive, got {speed}")
        self.speed = speed
        self._origin: Optional[float] = None

    async def advance_to(self, timeline_ms: Timestamp) -> None:
        if self._origin is None:
            self._origin = time.monotonic() - timeline_ms / 1000 / self.speed
        delay = self._origin + timeline_ms / 1000 / self.speed - time.monotonic()
        await asyncio.sleep(max(0.0, delay))

    def elapsed(self) -> float:
        return 0.0 if self._origin is None else time.monotonic() - self._origin


class VirtualClock:
    """Never sleeps; reports the wall time a replay at `speed` would have taken."""

    def __init__(self, speed: float = 1.0) -> None:
        if speed <= 0:
            raise ValueError(f"speed must be positive, got {speed}")
        self.speed = speed
        self._now = 0.0

    async def advance_to(self, timeline_ms: Timestamp) -> None:
        # let the consumer drain what was queued at the previous instant first
        await asyncio.sleep(0)
        self._now = max(self._now, timeline_ms / 1000 / self.speed)

    def elapsed(self) -> float:
        return self._now


@dataclass
class ReplayReport:
    delivered: int = 0
    dropped: int = 0
    ticks: int = 0
    executions: int = 0
    failures: int = 0
    timeline_ms: Timestamp = 0
    wall_time_s: float = 0.0
    records: List[RecognitionRecord] = field(default_factory=list)
    samples: List[EvalSample] = field(default_factory=list)

    def totals(self) -> dict:
        return {
            "delivered": self.delivered,
            "dropped": self.dropped,
            "ticks": self.ticks,
            "executions": self.executions,
            "failures": self.failures,
            "timeline_ms": self.timeline_ms,
            "wall_time_s": round(self.wall_time_s, 3),
        }


async def replay(
    plan: ReplayPlan,
    emit: Callable[[List[Statement]], Any],
    registry: Optional[Registry] = None,
    clock: Optional[Clock] = None,
    buffer: int = 4096,
    tick_ms: Optional[int] = None,
    run_start: Optional[Callable[[str, Timestamp], Any]] = None,
    tail_ms: Optional[int] = None,
    before_tick: Optional[Callable[[Timestamp], Any]] = None,
) -> ReplayReport:
    """
    Deliver the plan's events in timeline order to `emit` (the placing-node importer).

    The driver is the single producer into a bounded queue; one consumer task hands
    batches to `emit`. With a registry, scheduler ticks run every `tick_ms` of timeline
    once all events up to the tick instant are ingested, and continue for `tail_ms`
    after the last event. `run_start(run_id, start)` is called before a run's first event,
    `before_tick(now)` before every scheduler tick.
    A full queue drops the event and counts it.
    """
    clock = clock or VirtualClock(plan.speed)
    tick_ms = tick_ms or (registry.tick_period() if registry is not None else 500)
    tail_ms = 4 * tick_ms if tail_ms is None else tail_ms
    if registry is not None:
        registry.wall_clock = clock.elapsed
    queue: "asyncio.Queue[ReplayEvent]" = asyncio.Queue(maxsize=buffer)
    report = ReplayReport(timeline_ms=plan.duration)

    async def consume() -> None:
        while True:
            batch = [await queue.get()]
            while not queue.empty():
                batch.append(queue.get_nowait())
            try:
                emit([event.statement() for event in batch])
            except Exception as e:
                logger.error(f"Ingestion of {len(batch)} event(s) failed: {e}")
            finally:
                for _ in batch:
                    queue.task_done()

    next_tick = 0

    async def tick_until(limit: Timestamp, inclusive: bool) -> None:
        nonlocal next_tick
        while registry is not None and (next_tick <= limit if inclusive else next_tick < limit):
            await clock.advance_to(next_tick)
            await queue.join()
            if before_tick is not None:
                before_tick(next_tick)
            executions = await scheduler_tick(registry, next_tick)
            report.ticks += 1
            report.executions += len(executions)
            report.failures += sum(1 for e in executions if not e.ok)
            next_tick += tick_ms

    consumer = asyncio.create_task(consume())
    current_run = None
    try:
        for event in plan.events():
            await tick_until(event.time, inclusive=False)
            if event.run_id != current_run:
                current_run = event.run_id
                await queue.join()
                if run_start is not None:
                    run_start(current_run, event.time)
            await clock.advance_to(event.time)
            try:
                queue.put_nowait(event)
                report.delivered += 1
            except asyncio.QueueFull:
                report.dropped += 1
                logger.warning(f"Replay buffer full, dropped {event.sensor_id} at {event.time}")
        await tick_until(plan.duration + tail_ms, inclusive=True)
        await queue.join()
    finally:
        consumer.cancel()
        try:
            await consumer
        except asyncio.CancelledError:
            pass

    report.wall_time_s = clock.elapsed()
    if registry is not None:
        report.records = registry.recorder.records
        report.samples = registry.recorder.samples
    logger.info(
        f"Replay done: {report.delivered} delivered, {report.dropped} dropped, {report.ticks} ticks, "
        f"{len(report.records)} recognition(s), {report.wall_time_s:.2f}s"
    )
    return report
