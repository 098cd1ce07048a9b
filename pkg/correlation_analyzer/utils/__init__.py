"""Convenience exports for common utilities."""

from .rationals import format_rational, parse_rational, rational_sqrt
from .splitmix import SplitMix64
from .sqlite_utils import SQLiteConnectionPool
from .union_find import UnionFind, count_components, label_components

__all__ = [
    "format_rational",
    "parse_rational",
    "rational_sqrt",
    "SplitMix64",
    "SQLiteConnectionPool",
    "UnionFind",
    "count_components",
    "label_components",
]
