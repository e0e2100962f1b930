"""
placing maps raw sensor statements to topological person-location beliefs in the placing node
"""

from .topology import KIND_TAGS, LOCATION, Topology, TopologyError, in_name, load_topology, near_name
from .context import contextualize, ingest

__all__ = [
    "KIND_TAGS",
    "LOCATION",
    "Topology",
    "TopologyError",
    "in_name",
    "load_topology",
    "near_name",
    "contextualize",
    "ingest",
]
