import json
from fnmatch import fnmatchcase
from pathlib import Path
from typing import Dict, Iterable, List, Literal, Optional, Set, Union

from pydantic import BaseModel, Field, ValidationError

from src.statements import TagRule

LOCATION = "Location"

KIND_TAGS = {
    "M": "Motion",
    "I": "ItemPresence",
    "P": "Phone",
    "D": "Door",
    "F": "WaterFlow",
}


class TopologyError(ValueError):
    """Raised for topology files with undeclared symbols or unplaced sensors."""


class SensorSpec(BaseModel):
    id: str
    kind: Literal["M", "I", "P", "D", "F"]
    near: List[str] = Field(default_factory=list)
    located_in: Optional[str] = None
    best_effort: bool = False


class TopologyFile(BaseModel):
    rooms: List[str] = Field(default_factory=list)
    furniture: Dict[str, str] = Field(default_factory=dict)
    sensors: List[SensorSpec] = Field(default_factory=list)
    classes: Dict[str, List[str]] = Field(default_factory=dict)


def place_symbol(place: str) -> str:
    return place[:1].upper() + place[1:]


def near_name(place: str) -> str:
    return f"Near{place_symbol(place)}"


def in_name(room: str) -> str:
    return f"In{place_symbol(room)}"


class Topology:
    """
    Rooms, furniture and sensors with their isNearTo / isLocatedIn edges.

    A sensor's room is its own isLocatedIn edge, else the room of its first
    isNearTo place.
    """

    def __init__(self, spec: TopologyFile) -> None:
        self.rooms: Set[str] = set(spec.rooms)
        self.furniture: Dict[str, str] = dict(spec.furniture)
        self.sensors: Dict[str, SensorSpec] = {}
        self.classes: Dict[str, List[str]] = {k: list(v) for k, v in spec.classes.items()}
        self._validate(spec)

    def _validate(self, spec: TopologyFile) -> None:
        if not spec.sensors:
            raise TopologyError("no sensors")
        for item, room in self.furniture.items():
            if room not in self.rooms:
                raise TopologyError(f"undeclared room '{room}' in isLocatedIn({item}, {room})")
        places = self.rooms | set(self.furniture)
        for sensor in spec.sensors:
            if sensor.id in self.sensors:
                raise TopologyError(f"duplicate sensor '{sensor.id}'")
            for place in sensor.near:
                if place not in places:
                    raise TopologyError(f"undeclared place '{place}' in isNearTo({sensor.id}, {place})")
            if sensor.located_in is not None and sensor.located_in not in self.rooms:
                raise TopologyError(
                    f"undeclared room '{sensor.located_in}' in isLocatedIn({sensor.id}, {sensor.located_in})"
                )
            if not sensor.near and sensor.located_in is None:
                raise TopologyError(f"sensor '{sensor.id}' has no isNearTo or isLocatedIn edge")
            self.sensors[sensor.id] = sensor
        for tag, members in self.classes.items():
            unknown = [m for m in members if m not in self.sensors]
            if unknown:
                raise TopologyError(f"class '{tag}' references undeclared sensor(s) {unknown}")

    # -------------------------
    # PLACES
    # -------------------------
    def room_of(self, sensor_id: str) -> str:
        sensor = self.sensors[sensor_id]
        if sensor.located_in is not None:
            return sensor.located_in
        place = sensor.near[0]
        return place if place in self.rooms else self.furniture[place]

    def near_places(self, sensor_id: str) -> List[str]:
        """Furniture the sensor is near to; a room in isNearTo counts as its room, not as a Near belief."""
        return [p for p in self.sensors[sensor_id].near if p in self.furniture]

    def location_names(self) -> List[str]:
        return sorted({near_name(f) for f in self.furniture} | {in_name(r) for r in self.rooms})

    def beliefs_of(self, sensor_id: str) -> List[str]:
        return [near_name(p) for p in self.near_places(sensor_id)] + [in_name(self.room_of(sensor_id))]

    def expired_by(self, sensor_id: str) -> Set[str]:
        """Location names a reading of `sensor_id` turns to ⊥."""
        room = self.room_of(sensor_id)
        expired = {in_name(r) for r in self.rooms if r != room}
        near = set(self.near_places(sensor_id))
        if near:
            expired |= {near_name(f) for f in self.furniture if f not in near}
        else:
            expired |= {near_name(f) for f, r in self.furniture.items() if r != room}
        return expired

    # -------------------------
    # CLASSIFICATION
    # -------------------------
    def kind_tag(self, sensor_id: str) -> str:
        return KIND_TAGS[self.sensors[sensor_id].kind]

    def tag_rules(self) -> List[TagRule]:
        """One tag rule per sensor class member."""
        return [TagRule(tag=tag, name=member) for tag, members in sorted(self.classes.items()) for member in members]

    def statement_names(self) -> List[str]:
        return sorted(self.sensors) + self.location_names()

    def complexity_bound(self, tag_rules: Iterable[TagRule] = ()) -> int:
        """
        Upper bound on an overwrite node's complexity over this vocabulary.

        Every name holds one statement carrying its static tags plus the tag of any
        rule whose name pattern can match it.
        """
        tag_rules = list(tag_rules)
        total = len(tag_rules)
        for name in self.statement_names():
            static = {self.kind_tag(name)} if name in self.sensors else {LOCATION, name}
            matching = {r.tag for r in tag_rules if r.name is None or fnmatchcase(name, r.name)}
            total += 1 + len(static | matching)
        return total

    def __repr__(self) -> str:
        return f"Topology(rooms={len(self.rooms)}, furniture={len(self.furniture)}, sensors={len(self.sensors)})"


def load_topology(path: Union[str, Path]) -> Topology:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise TopologyError(f"{path}: {e}") from None
    if not text.strip():
        raise TopologyError(f"{path}: no sensors")
    try:
        spec = TopologyFile.model_validate(json.loads(text))
    except (json.JSONDecodeError, ValidationError) as e:
        raise TopologyError(f"{path}: {e}") from None
    try:
        return Topology(spec)
    except TopologyError as e:
        raise TopologyError(f"{path}: {e}") from None
