import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Union

from src.activities import DEFAULT_NETWORK, ActivityPackage, install, package_from_spec
from src.network import NetworkDefinitionError, NetworkSpec, Node, Registry, build_registry, load_network
from src.placing import Topology, TopologyError, ingest, load_topology
from src.statements import Policy, Statement, Timestamp

from .driver import Clock, ReplayReport, replay
from .plan import ReplayPlan

logger = logging.getLogger("fluentnet.replay")

DEFAULT_IDLE_MS = 2 * 60_000


@dataclass
class Pipeline:
    """A wired network: placing node O0 fed by the replay, plus the installed activity packages."""

    network: NetworkSpec
    topology: Topology
    registry: Registry
    placing: Node
    packages: List[ActivityPackage]
    idle_ms: Optional[int] = DEFAULT_IDLE_MS
    last_input: Optional[Timestamp] = None
    cleaned_at: Optional[Timestamp] = None

    def ingest(self, statements: Iterable[Statement]) -> None:
        statements = list(statements)
        if statements:
            latest = max(st.time for st in statements)
            self.last_input = latest if self.last_input is None else max(self.last_input, latest)
        ingest(self.placing, statements, self.topology)

    def reset_models(self, at: Timestamp) -> None:
        """Empty every model node; statements before `at` are never imported again."""
        for package in self.packages:
            with package.node.evaluation_pass():
                package.node.reset(at - 1)
        self.cleaned_at = at

    def clean_idle(self, now: Timestamp) -> bool:
        """
        Reset the model nodes once T0 has delivered nothing for `idle_ms`.

        Runs before every scheduler tick; one idle stretch triggers one reset.
        """
        if self.idle_ms is None or self.last_input is None:
            return False
        if now - self.last_input < self.idle_ms:
            return False
        if self.cleaned_at is not None and self.cleaned_at > self.last_input:
            return False
        self.reset_models(now)
        logger.debug(f"Model nodes reset at {now}, no input since {self.last_input}")
        return True


def build_pipeline(
    network_path: Union[str, Path, None] = None,
    poll_hz: Optional[int] = None,
    thresholds: Optional[Dict[int, Dict[str, int]]] = None,
    complexity_bound: Optional[int] = None,
    registry: Optional[Registry] = None,
    activities: Optional[Iterable[int]] = None,
    idle_ms: Optional[int] = DEFAULT_IDLE_MS,
) -> Pipeline:
    """
    Load the network file and its topology, then install the activity packages
    (all of them, or only the indices in `activities`).

    `thresholds` overrides model thresholds per activity index, e.g. {3: {"ε3": 40000}}.
    A placing node whose worst-case complexity exceeds `complexity_bound` is reported.
    Model nodes are emptied after `idle_ms` without input (None keeps them).
    """
    network = load_network(network_path or DEFAULT_NETWORK)
    if poll_hz is not None:
        network = network.model_copy(update={"poll_hz": poll_hz})
    if network.topology is None:
        raise NetworkDefinitionError("network declares no topology for the placing node")
    try:
        topology = load_topology(network.resolve(network.topology))
    except TopologyError as e:
        raise NetworkDefinitionError(str(e)) from None

    registry = build_registry(network, registry)
    if network.placing_node not in registry.nodes:
        registry.register_node(Node(network.placing_node, Policy.OVERWRITE))
    placing = registry.node(network.placing_node)
    placing.tag_rules.extend(topology.tag_rules())
    placing.refresh_metrics()

    bound = topology.complexity_bound(placing.tag_rules)
    if complexity_bound is not None and bound > complexity_bound:
        logger.warning(f"Placing node {placing.id} may reach complexity {bound}, above {complexity_bound}")
    else:
        logger.info(f"Placing node {placing.id} complexity bound {bound}")

    overrides = thresholds or {}
    selected = set(activities) if activities is not None else None
    packages = [
        package_from_spec(
            spec.model_copy(update={"thresholds": {**spec.thresholds, **overrides.get(spec.index, {})}}),
            network,
        )
        for spec in sorted(network.activities, key=lambda a: a.index)
        if selected is None or spec.index in selected
    ]
    install(registry, packages, location_tags=topology.location_names())
    return Pipeline(network, topology, registry, placing, packages, idle_ms)


async def run_replay(
    plan: ReplayPlan,
    pipeline: Pipeline,
    clock: Optional[Clock] = None,
    buffer: int = 4096,
) -> ReplayReport:
    """
    Replay the plan through the pipeline.

    Model nodes are cleaned on input silence, not at run boundaries; the runs are only
    used to attribute every recognition to the run it falls in.
    """
    report = await replay(
        plan,
        pipeline.ingest,
        registry=pipeline.registry,
        clock=clock,
        buffer=buffer,
        run_start=lambda run_id, at: logger.info(f"Run {run_id} starts at {at}"),
        before_tick=pipeline.clean_idle,
    )
    report.records = [replace(r, run_id=plan.run_at(r.recognized_at)) for r in report.records]
    return report
