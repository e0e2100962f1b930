"""
activities wires the activity models into importer / model node / detector packages
"""

from .procedures import RECOGNIZED, detector_run, importer_run
from .packages import DEFAULT_NETWORK, ActivityPackage, builtin_models, install, package_from_spec

__all__ = [
    "RECOGNIZED",
    "detector_run",
    "importer_run",
    "DEFAULT_NETWORK",
    "ActivityPackage",
    "builtin_models",
    "install",
    "package_from_spec",
]
