from dataclasses import dataclass, field, replace
from enum import Enum
from typing import FrozenSet, Iterable, Tuple

# Milliseconds since the replay epoch.
Timestamp = int


class Provenance(str, Enum):
    SENSOR = "sensor"
    DERIVED = "derived"
    PROCEDURE = "procedure"


@dataclass(frozen=True)
class Statement:
    """
    A named Boolean belief with the instant it was generated.

    Exactly one state and one time per statement; `tags` are the context classes
    the statement belongs to (e.g. `NearCabinet2`, `Recognized`).
    """

    name: str
    state: bool
    time: Timestamp
    tags: FrozenSet[str] = field(default_factory=frozenset)
    provenance: Provenance = Provenance.SENSOR

    def __post_init__(self):
        if not self.name:
            raise ValueError("Statement name must be non-empty")
        if self.time < 0:
            raise ValueError(f"Statement '{self.name}' has negative time {self.time}")
        if not isinstance(self.tags, frozenset):
            object.__setattr__(self, "tags", frozenset(self.tags))

    @property
    def key(self) -> Tuple[str, bool, Timestamp]:
        """Identity used for duplicate suppression: (name, state, time)."""
        return (self.name, self.state, self.time)

    def with_tags(self, tags: Iterable[str]) -> "Statement":
        merged = self.tags | frozenset(tags)
        if merged == self.tags:
            return self
        return replace(self, tags=merged)

    def dump(self) -> str:
        state = "T" if self.state else "F"
        return " ".join([self.name, state, str(self.time), *sorted(self.tags)])
