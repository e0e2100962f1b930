"""
statements holds the fluent statement domain: statements, stores and tag classification
"""

from .statement import Provenance, Statement, Timestamp
from .store import WILDCARD, Policy, StatementStore, insert, query
from .tags import TagRule, classify, classify_statement

__all__ = [
    "Provenance",
    "Statement",
    "Timestamp",
    "WILDCARD",
    "Policy",
    "StatementStore",
    "insert",
    "query",
    "TagRule",
    "classify",
    "classify_statement",
]
