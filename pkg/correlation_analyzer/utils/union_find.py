"""Disjoint-set forest used by every component count."""

from __future__ import annotations

from typing import Iterable, List, Tuple


class UnionFind:
    """Union-find over dense vertex indices ``0..n-1``.

    ``count`` tracks the number of classes, isolated vertices included.
    """

    __slots__ = ("parent", "count")

    def __init__(self, n: int) -> None:
        self.parent: List[int] = list(range(n))
        self.count = n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        """Merge the classes of ``a`` and ``b``; the smaller root wins."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.count -= 1
        return True

    def labels(self) -> Tuple[int, ...]:
        # roots are always the minimum vertex of their class
        return tuple(self.find(v) for v in range(len(self.parent)))


def count_components(
    n: int, endpoints: Tuple[Tuple[int, int], ...], mask: int
) -> int:
    """Number of components of the spanning subgraph selected by ``mask``."""
    uf = UnionFind(n)
    pos = 0
    while mask:
        if mask & 1:
            u, v = endpoints[pos]
            uf.union(u, v)
        mask >>= 1
        pos += 1
    return uf.count


def label_components(
    n: int, endpoints: Iterable[Tuple[int, int]]
) -> Tuple[int, Tuple[int, ...]]:
    uf = UnionFind(n)
    for u, v in endpoints:
        uf.union(u, v)
    return uf.count, uf.labels()


__all__ = ["UnionFind", "count_components", "label_components"]
