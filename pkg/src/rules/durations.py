import re
from typing import Union

_DURATION = re.compile(r"^\s*(\d+)\s*(ms|min|s|h)?\s*$")
_FACTORS = {None: 1, "ms": 1, "s": 1_000, "min": 60_000, "h": 3_600_000}


def parse_duration(value: Union[str, int, float]) -> int:
    """
    Convert `500ms`, `60s`, `3min`, `1h` or a bare number of milliseconds to integer ms.
    """
    if isinstance(value, bool):
        raise ValueError(f"Invalid duration {value!r}")
    if isinstance(value, (int, float)):
        if value < 0:
            raise ValueError(f"Negative duration {value!r}")
        return int(value)
    match = _DURATION.match(value)
    if not match:
        raise ValueError(f"Invalid duration '{value}' (expected <int>[ms|s|min|h])")
    amount, unit = match.groups()
    return int(amount) * _FACTORS[unit]


def format_duration(ms: int) -> str:
    for unit in ("h", "min", "s"):
        factor = _FACTORS[unit]
        if ms and ms % factor == 0:
            return f"{ms // factor}{unit}"
    return f"{ms}ms"
