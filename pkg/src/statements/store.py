import bisect
from enum import Enum
from typing import Dict, Iterable, Iterator, List, Optional

from .statement import Statement

WILDCARD = "*"


class Policy(str, Enum):
    OVERWRITE = "overwrite"
    APPEND = "append"


class StatementStore:
    """
    Statements keyed by name, under one of two write policies.

    - `overwrite`: at most one statement per name (the memory-free policy of the placing node).
    - `append`: every statement is kept, same-name statements in time order.

    Stores are single-writer; the owning node serializes mutations.
    """

    def __init__(self, policy: Policy = Policy.APPEND, statements: Iterable[Statement] = ()) -> None:
        self.policy = Policy(policy)
        self._by_name: Dict[str, List[Statement]] = {}
        for st in statements:
            self.insert(st)

    # -------------------------
    # WRITES
    # -------------------------
    def insert(self, st: Statement) -> "StatementStore":
        if self.policy is Policy.OVERWRITE:
            self._by_name[st.name] = [st]
            return self
        history = self._by_name.setdefault(st.name, [])
        # equal times keep arrival order
        idx = bisect.bisect_right(history, st.time, key=lambda s: s.time)
        history.insert(idx, st)
        return self

    def replace(self, old: Statement, new: Statement) -> None:
        history = self._by_name[old.name]
        history[history.index(old)] = new

    def remove(self, name: str) -> List[Statement]:
        return self._by_name.pop(name, [])

    def clear(self) -> None:
        self._by_name.clear()

    # -------------------------
    # READS
    # -------------------------
    def query(self, name_pattern: str = WILDCARD, tag: Optional[str] = None) -> List[Statement]:
        if name_pattern == WILDCARD:
            candidates = [st for history in self._by_name.values() for st in history]
        else:
            candidates = list(self._by_name.get(name_pattern, []))
        if tag is not None:
            candidates = [st for st in candidates if tag in st.tags]
        return sorted(candidates, key=lambda st: (st.time, st.name))

    def exists(self, name_pattern: str = WILDCARD, tag: Optional[str] = None) -> bool:
        """Existence-only check; never looks at state or time."""
        if name_pattern == WILDCARD:
            histories = self._by_name.values()
        else:
            histories = [self._by_name.get(name_pattern, [])]
        for history in histories:
            for st in history:
                if tag is None or tag in st.tags:
                    return True
        return False

    def latest(self, name: str) -> Optional[Statement]:
        history = self._by_name.get(name)
        return history[-1] if history else None

    def contains_key(self, st: Statement) -> bool:
        return any(s.key == st.key for s in self._by_name.get(st.name, []))

    def names(self) -> List[str]:
        return sorted(self._by_name)

    def tag_assertions(self) -> int:
        return sum(len(st.tags) for st in self)

    def snapshot(self) -> "StatementStore":
        copy = StatementStore(self.policy)
        copy._by_name = {name: list(history) for name, history in self._by_name.items()}
        return copy

    def dump(self) -> str:
        """Line-oriented debug form, one `name state time tags...` line per statement."""
        return "\n".join(st.dump() for st in self.query())

    def __iter__(self) -> Iterator[Statement]:
        for history in self._by_name.values():
            yield from history

    def __len__(self) -> int:
        return sum(len(history) for history in self._by_name.values())

    def __repr__(self) -> str:
        return f"StatementStore(policy={self.policy.value}, size={len(self)})"


def insert(store: StatementStore, st: Statement) -> StatementStore:
    return store.insert(st)


def query(store: StatementStore, name_pattern: str = WILDCARD, tag: Optional[str] = None) -> List[Statement]:
    return store.query(name_pattern, tag)
