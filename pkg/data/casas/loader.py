import json
import logging
from dataclasses import dataclass
from datetime import datetime, timedelta
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import pandas as pd

logger = logging.getLogger("fluentnet.casas")

DATA_DIR = Path(__file__).resolve().parent
VALUE_TOKENS_PATH = DATA_DIR / "value_tokens.json"
VARIANT_GLOBS = {
    "interwoven": "*interwoven*",
    "sequential": "*sequential*",
}
KINDS = ("M", "I", "P", "D", "F")
LABEL_RE = r"^(?P<activity>\d+)(?:-(?P<marker>start|end))?$"


class DatasetParseError(ValueError):
    def __init__(self, message: str, source: Optional[str] = None, line: Optional[int] = None):
        self.message = message
        self.source = source
        self.line = line
        where = ""
        if source is not None:
            where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(f"{where}{message}")


@dataclass(frozen=True)
class SensorEvent:
    wall_time: datetime
    sensor_id: str
    kind: str
    value: bool
    label: Optional[int] = None
    line: Optional[int] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown sensor kind '{self.kind}' for {self.sensor_id}")


@dataclass
class Run:
    """One participant run: time-ordered events of one file."""

    run_id: str
    events: List[SensorEvent]

    @property
    def start(self) -> datetime:
        return self.events[0].wall_time

    def offset_ms(self, event: SensorEvent) -> int:
        return (event.wall_time - self.start) // timedelta(milliseconds=1)

    @property
    def duration_ms(self) -> int:
        return self.offset_ms(self.events[-1]) if self.events else 0

    def label_windows(self) -> Dict[int, Tuple[int, int]]:
        """[first, last] labelled event offset per activity."""
        windows: Dict[int, Tuple[int, int]] = {}
        for event in self.events:
            if event.label is None:
                continue
            at = self.offset_ms(event)
            first, _ = windows.get(event.label, (at, at))
            windows[event.label] = (first, at)
        return windows


@lru_cache(maxsize=None)
def _load_value_tokens(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def value_tokens(path: Union[str, Path, None] = None) -> dict:
    return _load_value_tokens(str(path or VALUE_TOKENS_PATH))


def _kind(sensor_id: str, kinds: Dict[str, str]) -> Optional[str]:
    for prefix in sorted(kinds, key=len, reverse=True):
        if sensor_id.startswith(prefix):
            return kinds[prefix]
    return None


def _frame(text: str, source: str) -> pd.DataFrame:
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        fields = line.split()
        if not fields or fields[0].startswith("#"):
            continue
        if len(fields) not in (4, 5):
            raise DatasetParseError(
                f"expected 'date time sensor value [label]', got {len(fields)} field(s)", source, lineno
            )
        rows.append([lineno, *fields, *([None] * (5 - len(fields)))])
    return pd.DataFrame(rows, columns=["line", "date", "time", "sensor_id", "raw_value", "label"])


def _first_line(df: pd.DataFrame, mask: pd.Series) -> int:
    return int(df.loc[mask, "line"].iloc[0])


def normalize(df: pd.DataFrame, source: str, tokens: Optional[dict] = None) -> pd.DataFrame:
    """
    Turn raw `date time sensor value [label]` columns into typed event columns.

    Skips temperature, brightness and battery records; raises DatasetParseError for
    unparseable times, unknown sensor prefixes, unknown value tokens, bad labels and
    time going backwards.
    """
    tokens = tokens or value_tokens()
    columns = ["line", "wall_time", "sensor_id", "kind", "value", "label"]
    if df.empty:
        return pd.DataFrame(columns=columns)

    df = df[~df["sensor_id"].str.startswith(tuple(tokens["skip_prefixes"]))].copy()
    if df.empty:
        return pd.DataFrame(columns=columns)

    df["wall_time"] = pd.to_datetime(df["date"] + " " + df["time"], errors="coerce", format="ISO8601")
    if df["wall_time"].isna().any():
        raise DatasetParseError("unparseable date/time", source, _first_line(df, df["wall_time"].isna()))

    df["kind"] = df["sensor_id"].map(lambda s: _kind(s, tokens["kinds"]))
    if df["kind"].isna().any():
        mask = df["kind"].isna()
        raise DatasetParseError(
            f"unknown sensor kind for '{df.loc[mask, 'sensor_id'].iloc[0]}'", source, _first_line(df, mask)
        )

    upper = df["raw_value"].str.upper()
    numeric = pd.to_numeric(df["raw_value"], errors="coerce")
    df["value"] = pd.NA
    df.loc[upper.isin(tokens["true"]), "value"] = True
    df.loc[upper.isin(tokens["false"]), "value"] = False
    flows = df["value"].isna() & numeric.notna() & (df["kind"] == "F")
    df.loc[flows, "value"] = numeric[flows] > tokens["flow_threshold"]
    if df["value"].isna().any():
        mask = df["value"].isna()
        raise DatasetParseError(
            f"unknown value token '{df.loc[mask, 'raw_value'].iloc[0]}'", source, _first_line(df, mask)
        )

    labels = df["label"].str.extract(LABEL_RE)
    bad = df["label"].notna() & labels["activity"].isna()
    if bad.any():
        raise DatasetParseError(f"bad label '{df.loc[bad, 'label'].iloc[0]}'", source, _first_line(df, bad))
    df["label"] = pd.to_numeric(labels["activity"]).astype("Int64")

    backwards = df["wall_time"].diff() < pd.Timedelta(0)
    if backwards.any():
        raise DatasetParseError("timestamps go backwards", source, _first_line(df, backwards))

    return df[columns].reset_index(drop=True)


def parse_run_text(text: str, run_id: str, source: Optional[str] = None, tokens: Optional[dict] = None) -> Run:
    source = source or run_id
    df = normalize(_frame(text, source), source, tokens)
    events = [
        SensorEvent(
            wall_time=row.wall_time.to_pydatetime(),
            sensor_id=row.sensor_id,
            kind=row.kind,
            value=bool(row.value),
            label=None if pd.isna(row.label) else int(row.label),
            line=int(row.line),
        )
        for row in df.itertuples(index=False)
    ]
    return Run(run_id, events)


def parse_run(path: Union[str, Path], tokens: Optional[dict] = None) -> Run:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise DatasetParseError(str(e), str(path)) from None
    return parse_run_text(text, path.stem, str(path), tokens)


def parse_dataset(
    path: Union[str, Path],
    variant: Optional[str] = None,
    pattern: Optional[str] = None,
    tokens: Optional[dict] = None,
) -> List[Run]:
    """
    Parse one run file, or every run file of a directory matching the variant glob.
    Runs without any sensor event after filtering are left out.
    """
    path = Path(path).expanduser()
    if path.is_file():
        files = [path]
    else:
        if variant is not None and variant not in VARIANT_GLOBS:
            raise DatasetParseError(f"unknown variant '{variant}', expected one of {sorted(VARIANT_GLOBS)}")
        glob = pattern or VARIANT_GLOBS.get(variant, "*")
        files = sorted(p for p in path.glob(glob) if p.is_file())
        if not files:
            raise DatasetParseError(f"no run files matching '{glob}'", str(path))

    runs = [parse_run(f, tokens) for f in files]
    empty = [r.run_id for r in runs if not r.events]
    if empty:
        logger.warning(f"Skipping runs without sensor events: {empty}")
    return [r for r in runs if r.events]


class Casas:
    """
    Usage:
        from data.casas import Casas
        casas = Casas("~/datasets/adlinterweave", variant="interwoven")
        events = casas.get()
    """

    def __init__(self, base_dir: Union[str, Path], variant: Optional[str] = "interwoven", pattern: Optional[str] = None) -> None:
        self._base_dir = Path(base_dir).expanduser()
        self.variant = variant
        self.pattern = pattern
        self.runs: Optional[List[Run]] = None

    def _init_data(self) -> None:
        self.runs = parse_dataset(self._base_dir, self.variant, self.pattern)
        logger.info(f"{len(self.runs)} runs loaded from {self._base_dir}")

    def get_info(self) -> Dict[str, str]:
        """
        Returns high-level information about the CASAS ADL runs.
        """
        return {
            "name": "CASAS ADL",
            "description": (
                "Smart-home sensor logs of scripted Activities of Daily Living. Participants performed "
                "eight activities, once in sequence and once interwoven; each run is one file of "
                "motion, item, door, water-flow and phone readings with activity labels."
            ),
            "variant": str(self.variant),
            "formats": ["date time sensor value [label]"],
            "dataset_folder": str(self._base_dir),
        }

    def get(self) -> pd.DataFrame:
        """
        Returns every event of every run as a DataFrame.

        Returns:
            pd.DataFrame with columns:
                - run_id:     file stem of the run
                - wall_time:  reading date-time
                - offset_ms:  milliseconds since the run's first event
                - sensor_id:  e.g. 'D07', 'AD1-B'
                - kind:       one of M, I, P, D, F
                - value:      normalized Boolean reading
                - label:      activity index or <NA>
        """
        rows = [
            {
                "run_id": run.run_id,
                "wall_time": event.wall_time,
                "offset_ms": run.offset_ms(event),
                "sensor_id": event.sensor_id,
                "kind": event.kind,
                "value": event.value,
                "label": event.label,
            }
            for run in self.get_raw()
            for event in run.events
        ]
        df = pd.DataFrame(rows, columns=["run_id", "wall_time", "offset_ms", "sensor_id", "kind", "value", "label"])
        df["label"] = df["label"].astype("Int64")
        return df

    def get_raw(self) -> List[Run]:
        if self.runs is None:
            self._init_data()
        return list(self.runs)

    def label_windows(self) -> pd.DataFrame:
        rows = [
            {"run_id": run.run_id, "activity": activity, "start_ms": start, "end_ms": end}
            for run in self.get_raw()
            for activity, (start, end) in sorted(run.label_windows().items())
        ]
        return pd.DataFrame(rows, columns=["run_id", "activity", "start_ms", "end_ms"])
