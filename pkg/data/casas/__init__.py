from .loader import Casas, DatasetParseError, Run, SensorEvent, parse_dataset, parse_run, parse_run_text, value_tokens
from .synth import SCRIPTS_DIR, builtin_scripts, compile_script, load_script, scenario, write_run

__all__ = [
    "Casas",
    "DatasetParseError",
    "Run",
    "SensorEvent",
    "parse_dataset",
    "parse_run",
    "parse_run_text",
    "value_tokens",
    "SCRIPTS_DIR",
    "builtin_scripts",
    "compile_script",
    "load_script",
    "scenario",
    "write_run",
]
