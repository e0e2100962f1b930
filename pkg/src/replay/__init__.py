"""
replay lays dataset runs out on one timeline and streams them through the network
"""

from .plan import ReplayEvent, ReplayPlan, build_plan
from .driver import Clock, ReplayReport, VirtualClock, WallClock, replay
from .pipeline import DEFAULT_IDLE_MS, Pipeline, build_pipeline, run_replay

__all__ = [
    "ReplayEvent",
    "ReplayPlan",
    "build_plan",
    "Clock",
    "ReplayReport",
    "VirtualClock",
    "WallClock",
    "replay",
    "DEFAULT_IDLE_MS",
    "Pipeline",
    "build_pipeline",
    "run_replay",
]
