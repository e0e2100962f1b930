import logging
import os
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field, field_validator

from src.rules import parse_duration

REPO_ROOT = Path(__file__).resolve().parent.parent


def load_repo_env(start: Optional[Path] = None) -> Optional[Path]:
    """Walk up directories until .env is found and load it. Returns the file, or None when there is none."""
    current_dir = Path(start or Path(__file__).resolve().parent)
    for directory in (current_dir, *current_dir.parents):
        env_path = directory / ".env"
        if env_path.exists():
            load_dotenv(env_path)
            return env_path
    return None


class Settings(BaseModel):
    poll_hz: int = Field(default=2, ge=1)
    gap_ms: int = Field(default=3 * 60_000, ge=0)
    idle_ms: int = Field(default=2 * 60_000, gt=0)
    speed: float = Field(default=1.0, gt=0)
    seed: int = 0
    buffer: int = Field(default=4096, ge=1)
    grace_ms: int = Field(default=60_000, ge=0)
    complexity_bound: int = Field(default=400, ge=1)
    network: Path = REPO_ROOT / "config" / "casas_network.json"
    results_dir: Path = Path("results")
    log_level: str = "INFO"

    @field_validator("gap_ms", "idle_ms", "grace_ms", mode="before")
    @classmethod
    def _duration(cls, value):
        return parse_duration(value)

    @field_validator("log_level")
    @classmethod
    def _level(cls, value: str) -> str:
        value = value.upper()
        if value not in logging.getLevelNamesMapping():
            raise ValueError(f"unknown log level '{value}'")
        return value


_ENV = {
    "poll_hz": "FLUENTNET_POLL_HZ",
    "gap_ms": "FLUENTNET_GAP",
    "idle_ms": "FLUENTNET_IDLE",
    "speed": "FLUENTNET_SPEED",
    "seed": "FLUENTNET_SEED",
    "buffer": "FLUENTNET_BUFFER",
    "grace_ms": "FLUENTNET_GRACE",
    "complexity_bound": "FLUENTNET_COMPLEXITY_BOUND",
    "network": "FLUENTNET_NETWORK",
    "results_dir": "FLUENTNET_RESULTS_DIR",
    "log_level": "FLUENTNET_LOG_LEVEL",
}


def get_settings(**overrides) -> Settings:
    """Settings from the environment (after loading the repo .env); keyword overrides that are not None win."""
    load_repo_env()
    values = {field: os.getenv(var) for field, var in _ENV.items() if os.getenv(var) is not None}
    values.update({k: v for k, v in overrides.items() if v is not None})
    return Settings(**values)


def configure_logging(level: str = "INFO") -> None:
    logging.basicConfig(level=getattr(logging, level.upper(), logging.INFO))
