import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Union

from src.config import REPO_ROOT
from src.network import (
    ActivitySpec,
    Condition,
    Event,
    NetworkDefinitionError,
    NetworkSpec,
    Node,
    Procedure,
    Registry,
    RegistryError,
    load_network,
)
from src.rules import Model, ModelError, load_model
from src.statements import Policy, TagRule

from .procedures import RECOGNIZED

logger = logging.getLogger("fluentnet.activities")

DEFAULT_NETWORK = REPO_ROOT / "config" / "casas_network.json"


@dataclass
class ActivityPackage:
    """Model node O<i> with its importer T<i> (placing node -> O<i>) and detector D<i>."""

    index: int
    name: str
    model: Model
    node: Node
    importer: Procedure
    detector: Procedure

    @property
    def relevant_names(self) -> List[str]:
        return list(self.importer.params["relevant_names"])

    @property
    def relevant_tags(self) -> List[str]:
        return list(self.importer.params["relevant_tags"])


def package_from_spec(spec: ActivitySpec, network: NetworkSpec, poll_hz: Optional[int] = None) -> ActivityPackage:
    poll_hz = poll_hz or network.poll_hz
    try:
        model = load_model(network.resolve(spec.model))
        if spec.thresholds:
            model = model.with_thresholds(spec.thresholds)
    except (OSError, ModelError) as e:
        raise NetworkDefinitionError(f"activity {spec.index}: {e}") from None

    node_id = f"O{spec.index}"
    recognized = TagRule(tag=RECOGNIZED, name=model.final_name, state=True)
    node = Node(node_id, Policy.APPEND, [model], [recognized, *spec.tag_rules])

    names = sorted(model.relevant_names() | set(spec.relevant_names))
    tags = sorted(model.relevant_tags() | set(spec.relevant_tags))
    importer = Procedure(
        f"T{spec.index}",
        "importer",
        [Event([Condition(network.placing_node, tag=tag, frequency=poll_hz) for tag in event]) for event in spec.events],
        params={
            "source": network.placing_node,
            "target": node_id,
            "relevant_names": names,
            "relevant_tags": tags,
        },
        rearm=True,
    )
    detector = Procedure(
        f"D{spec.index}",
        "detector",
        [Event([Condition(node_id, tag=RECOGNIZED, frequency=poll_hz)])],
        params={"target": node_id, "activity": spec.index},
    )
    return ActivityPackage(spec.index, spec.name, model, node, importer, detector)


def builtin_models(network: Union[str, Path, NetworkSpec] = DEFAULT_NETWORK, poll_hz: Optional[int] = None) -> List[ActivityPackage]:
    """The activity packages declared by the network file, ordered by index."""
    if not isinstance(network, NetworkSpec):
        network = load_network(network)
    return [package_from_spec(spec, network, poll_hz) for spec in sorted(network.activities, key=lambda a: a.index)]


def install(registry: Registry, packages: Iterable[ActivityPackage], location_tags: Optional[Iterable[str]] = None) -> Registry:
    """
    Register each package's node, importer and detector.
    With `location_tags`, importer events must reference only those placing-node tags.
    """
    allowed = set(location_tags) if location_tags is not None else None
    for package in packages:
        if allowed is not None:
            stray = sorted({c.tag for e in package.importer.events for c in e.conditions} - allowed)
            if stray:
                raise NetworkDefinitionError(f"importer {package.importer.id} listens to non-location tag(s) {stray}")
        try:
            registry.register_node(package.node)
            registry.register_procedure(package.importer)
            registry.register_procedure(package.detector)
        except RegistryError as e:
            raise NetworkDefinitionError(f"activity {package.index}: {e}") from None
        logger.info(f"Installed activity {package.index} ({package.name}) on node {package.node.id}")
    return registry
