from fnmatch import fnmatchcase
from typing import Iterable, Optional

from pydantic import BaseModel, ConfigDict

from .statement import Provenance, Statement
from .store import StatementStore


class TagRule(BaseModel):
    """
    Predicate over a single statement's fields; matching statements gain `tag`.

    Every field that is set must hold. `name` accepts fnmatch patterns (`Near*`).
    """

    model_config = ConfigDict(frozen=True)

    tag: str
    name: Optional[str] = None
    state: Optional[bool] = None
    requires_tag: Optional[str] = None
    provenance: Optional[Provenance] = None

    def matches(self, st: Statement) -> bool:
        if self.name is not None and not fnmatchcase(st.name, self.name):
            return False
        if self.state is not None and st.state != self.state:
            return False
        if self.requires_tag is not None and self.requires_tag not in st.tags:
            return False
        if self.provenance is not None and st.provenance != self.provenance:
            return False
        return True


def classify_statement(st: Statement, rules: Iterable[TagRule]) -> Statement:
    return st.with_tags(rule.tag for rule in rules if rule.matches(st))


def classify(store: StatementStore, rules: Iterable[TagRule]) -> StatementStore:
    """
    Add the tag of every matching rule to every statement of the store.

    Idempotent and monotone: tags are only ever added. Rules chained through
    `requires_tag` are applied until no statement changes.
    """
    rules = list(rules)
    if not rules:
        return store
    changed = True
    while changed:
        changed = False
        for st in list(store):
            tagged = classify_statement(st, rules)
            if tagged is not st:
                store.replace(st, tagged)
                changed = True
    return store
