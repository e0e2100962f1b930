import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Union

from pydantic import BaseModel, Field, ValidationError, field_validator

from src.rules import ModelError, load_model, parse_duration
from src.statements import WILDCARD, Policy, TagRule

from .node import Node
from .registry import Condition, Event, Procedure, Registry, RegistryError

logger = logging.getLogger("fluentnet.network")


class NetworkDefinitionError(ValueError):
    """Raised when a network definition file cannot be read or wired."""


class ConditionSpec(BaseModel):
    node: str
    name: str = WILDCARD
    tag: Optional[str] = None
    frequency: Optional[int] = Field(default=None, ge=1)


class ProcedureSpec(BaseModel):
    id: str
    implementation: str
    events: List[List[ConditionSpec]] = Field(min_length=1)
    params: Dict[str, Union[str, int, float, bool, List[str]]] = Field(default_factory=dict)
    rearm: bool = False


class NodeSpec(BaseModel):
    id: str
    policy: Policy = Policy.APPEND
    models: List[str] = Field(default_factory=list)
    tag_rules: List[TagRule] = Field(default_factory=list)


class ActivitySpec(BaseModel):
    """One importer/model/detector package: node `O<index>`, importer `T<index>`, detector `D<index>`."""

    index: int = Field(ge=1)
    name: str
    model: str
    relevant_names: List[str] = Field(default_factory=list)
    relevant_tags: List[str] = Field(default_factory=list)
    events: List[List[str]] = Field(min_length=1)
    tag_rules: List[TagRule] = Field(default_factory=list)
    thresholds: Dict[str, Union[int, str]] = Field(default_factory=dict)

    @field_validator("thresholds")
    @classmethod
    def _durations(cls, value):
        return {k: parse_duration(v) for k, v in value.items()}


class NetworkSpec(BaseModel):
    poll_hz: int = Field(default=2, ge=1)
    placing_node: str = "O0"
    topology: Optional[str] = None
    nodes: List[NodeSpec] = Field(default_factory=list)
    procedures: List[ProcedureSpec] = Field(default_factory=list)
    activities: List[ActivitySpec] = Field(default_factory=list)
    base_dir: Path = Path(".")

    def resolve(self, relative: str) -> Path:
        return (self.base_dir / relative).resolve()


def load_network(path: Union[str, Path]) -> NetworkSpec:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
        spec = NetworkSpec.model_validate({**raw, "base_dir": path.parent})
    except (OSError, json.JSONDecodeError, ValidationError, ValueError) as e:
        raise NetworkDefinitionError(f"{path}: {e}") from None
    ids = [n.id for n in spec.nodes] + [f"O{a.index}" for a in spec.activities]
    duplicates = sorted({i for i in ids if ids.count(i) > 1})
    if duplicates:
        raise NetworkDefinitionError(f"{path}: duplicate node id(s) {duplicates}")
    return spec


def make_condition(spec: ConditionSpec, poll_hz: int) -> Condition:
    return Condition(spec.node, spec.name, spec.tag, spec.frequency or poll_hz)


def build_node(spec: NodeSpec, network: NetworkSpec) -> Node:
    try:
        models = [load_model(network.resolve(m)) for m in spec.models]
    except (OSError, ModelError) as e:
        raise NetworkDefinitionError(f"node {spec.id}: {e}") from None
    return Node(spec.id, spec.policy, models, spec.tag_rules)


def build_procedure(spec: ProcedureSpec, poll_hz: int) -> Procedure:
    events = [Event([make_condition(c, poll_hz) for c in event]) for event in spec.events]
    return Procedure(spec.id, spec.implementation, events, dict(spec.params), spec.rearm)


def build_registry(network: NetworkSpec, registry: Optional[Registry] = None) -> Registry:
    """Register the declared nodes and procedures; activity packages are installed separately."""
    registry = registry or Registry()
    try:
        for node_spec in network.nodes:
            registry.register_node(build_node(node_spec, network))
        for proc_spec in network.procedures:
            registry.register_procedure(build_procedure(proc_spec, network.poll_hz))
    except RegistryError as e:
        raise NetworkDefinitionError(str(e)) from None
    logger.info(f"Built network: {registry}")
    return registry
