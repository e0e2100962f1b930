"""
network keeps the registry of reasoning nodes, conditions, events and procedures and schedules them
"""

from .node import Node, NodeMetrics
from .registry import (
    CORE_NODE,
    SEMAPHORE,
    Condition,
    Event,
    Procedure,
    Registry,
    RegistryError,
    implementation,
    implementations,
    resolve_implementation,
)
from .scheduler import Execution, PollDeferred, core_manager, evaluate_condition, runnable, scheduler_tick
from .definition import (
    ActivitySpec,
    ConditionSpec,
    NetworkDefinitionError,
    NetworkSpec,
    NodeSpec,
    ProcedureSpec,
    build_registry,
    load_network,
    make_condition,
)

__all__ = [
    "Node",
    "NodeMetrics",
    "CORE_NODE",
    "SEMAPHORE",
    "Condition",
    "Event",
    "Procedure",
    "Registry",
    "RegistryError",
    "implementation",
    "implementations",
    "resolve_implementation",
    "Execution",
    "PollDeferred",
    "core_manager",
    "evaluate_condition",
    "runnable",
    "scheduler_tick",
    "ActivitySpec",
    "ConditionSpec",
    "NetworkDefinitionError",
    "NetworkSpec",
    "NodeSpec",
    "ProcedureSpec",
    "build_registry",
    "load_network",
    "make_condition",
]
