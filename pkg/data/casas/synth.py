import re
from datetime import datetime, timedelta
from pathlib import Path
from typing import Dict, List, Optional, Union

from .loader import DATA_DIR, DatasetParseError, Run, parse_run_text

SCRIPTS_DIR = DATA_DIR / "scripts"
SCRIPT_START = datetime(2008, 2, 27, 12, 0, 0)
_CLOCK = re.compile(r"^(?P<min>\d+):(?P<sec>\d{2})(?:\.(?P<ms>\d{1,3}))?$")
_STEP = re.compile(r"^\+(?P<amount>\d+)(?P<unit>ms|s|min|h)?$")
_UNITS = {"ms": 1, "s": 1000, "min": 60_000, "h": 3_600_000}


def _offset(token: str, previous: int, source: str, lineno: int) -> int:
    step = _STEP.match(token)
    if step:
        return previous + int(step["amount"]) * _UNITS[step["unit"] or "ms"]
    clock = _CLOCK.match(token)
    if not clock:
        raise DatasetParseError(f"bad offset '{token}', expected '+<dur>' or 'mm:ss'", source, lineno)
    at = (int(clock["min"]) * 60 + int(clock["sec"])) * 1000 + int((clock["ms"] or "0").ljust(3, "0"))
    if at < previous:
        raise DatasetParseError(f"offset '{token}' goes back in time", source, lineno)
    return at


def compile_script(text: str, start: datetime = SCRIPT_START, source: str = "<script>") -> str:
    """
    Compile `<offset> <sensor> <value> [label]` lines to CASAS `date time sensor value [label]` lines.

    `+<dur>` is relative to the previous line, `mm:ss[.mmm]` is absolute from the script start.
    """
    out: List[str] = []
    offset = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) not in (3, 4):
            raise DatasetParseError(
                f"expected '<offset> <sensor> <value> [label]', got {len(fields)} field(s)", source, lineno
            )
        offset = _offset(fields[0], offset, source, lineno)
        stamp = start + timedelta(milliseconds=offset)
        out.append(" ".join([stamp.strftime("%Y-%m-%d %H:%M:%S.%f"), *fields[1:]]))
    return "\n".join(out) + "\n"


def load_script(path: Union[str, Path], start: datetime = SCRIPT_START) -> Run:
    path = Path(path)
    text = compile_script(path.read_text(encoding="utf-8"), start, str(path))
    return parse_run_text(text, path.stem, str(path))


def builtin_scripts() -> Dict[str, Path]:
    return {p.stem: p for p in sorted(SCRIPTS_DIR.glob("*.script"))}


def scenario(name: str = "interwoven", start: datetime = SCRIPT_START) -> List[Run]:
    """Runs of a bundled scenario: the scripts listed, in order, in `scripts/<name>.order`."""
    order = (SCRIPTS_DIR / f"{name}.order").read_text(encoding="utf-8").split()
    scripts = builtin_scripts()
    missing = [s for s in order if s not in scripts]
    if missing:
        raise DatasetParseError(f"unknown script(s) {missing}", f"{name}.order")
    return [load_script(scripts[s], start) for s in order]


def write_run(text: str, out: Optional[Union[str, Path]]) -> Optional[Path]:
    if out is None:
        return None
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="utf-8")
    return out
