"""Multigraphs with two marked edges, edge subsets as bitmasks.

Vertices are dense integers ``0..n-1``; loops and parallel edges are allowed.
The declaration order of the edges is the bit order of every ``EdgeSet``.
"""

from __future__ import annotations

import logging
import re
import string
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from correlation_analyzer.utils.splitmix import SplitMix64
from correlation_analyzer.utils.union_find import count_components, label_components

logger = logging.getLogger(__name__)

COUPLING_VARIABLE = "q"
_EDGE_ID = re.compile(r"^[A-Za-z][A-Za-z0-9_]*$")


# ----------------------------------------------------------------------
# Errors
# ----------------------------------------------------------------------
class GraphParseError(ValueError):
    """Graph file does not follow the line format."""

    def __init__(self, message: str, line_no: Optional[int] = None) -> None:
        self.line_no = line_no
        prefix = f"line {line_no}: " if line_no is not None else ""
        super().__init__(prefix + message)


class DuplicateEdgeError(GraphParseError):
    pass


class MarkerError(GraphParseError):
    pass


class VertexRangeError(GraphParseError):
    pass


class GraphOperationError(ValueError):
    """Operation not allowed on this graph or edge subset."""


# ----------------------------------------------------------------------
# Value types
# ----------------------------------------------------------------------
class Universe(str, Enum):
    FULL = "E"
    EF = "E^ef"


@dataclass(frozen=True)
class Edge:
    id: str
    u: int
    v: int

    @property
    def is_loop(self) -> bool:
        return self.u == self.v

    def same_endpoints(self, other: "Edge") -> bool:
        return {self.u, self.v} == {other.u, other.v}


@dataclass(frozen=True)
class EdgeSet:
    """Subset of a graph's edges; bit ``i`` is the ``i``-th declared edge."""

    mask: int
    universe: Universe = Universe.EF

    def __post_init__(self) -> None:
        if self.mask < 0:
            raise ValueError("negative edge mask")

    def _merge(self, other: "EdgeSet") -> Universe:
        if self.universe is Universe.FULL or other.universe is Universe.FULL:
            return Universe.FULL
        return Universe.EF

    def __or__(self, other: "EdgeSet") -> "EdgeSet":
        return EdgeSet(self.mask | other.mask, self._merge(other))

    def __and__(self, other: "EdgeSet") -> "EdgeSet":
        return EdgeSet(self.mask & other.mask, self.universe)

    def __sub__(self, other: "EdgeSet") -> "EdgeSet":
        return EdgeSet(self.mask & ~other.mask, self.universe)

    def __le__(self, other: "EdgeSet") -> bool:
        return self.mask & ~other.mask == 0

    def __len__(self) -> int:
        return bin(self.mask).count("1")

    def __bool__(self) -> bool:
        return self.mask != 0

    def __iter__(self) -> Iterator[int]:
        mask, pos = self.mask, 0
        while mask:
            if mask & 1:
                yield pos
            mask >>= 1
            pos += 1

    def isdisjoint(self, other: "EdgeSet") -> bool:
        return self.mask & other.mask == 0


EMPTY = EdgeSet(0)


@dataclass(frozen=True)
class Multigraph:
    vertex_count: int
    edges: Tuple[Edge, ...]
    marked_e: str
    marked_f: str
    _index: Dict[str, int] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        if self.vertex_count < 1:
            raise GraphOperationError("a multigraph needs at least one vertex")
        index: Dict[str, int] = {}
        for pos, edge in enumerate(self.edges):
            if edge.id in index:
                raise GraphOperationError(f"duplicate edge id {edge.id!r}")
            if not (0 <= edge.u < self.vertex_count and 0 <= edge.v < self.vertex_count):
                raise GraphOperationError(f"edge {edge.id!r} leaves the vertex range")
            index[edge.id] = pos
        if self.marked_e == self.marked_f:
            raise GraphOperationError("e and f must be distinct edges")
        for marker in (self.marked_e, self.marked_f):
            if marker not in index:
                raise GraphOperationError(f"marked edge {marker!r} is not declared")
        object.__setattr__(self, "_index", index)

    # -- lookup ---------------------------------------------------------
    def index_of(self, edge_id: str) -> int:
        try:
            return self._index[edge_id]
        except KeyError:
            raise GraphOperationError(f"unknown edge id {edge_id!r}") from None

    def edge(self, edge_id: str) -> Edge:
        return self.edges[self.index_of(edge_id)]

    @property
    def e(self) -> Edge:
        return self.edge(self.marked_e)

    @property
    def f(self) -> Edge:
        return self.edge(self.marked_f)

    @cached_property
    def edge_ids(self) -> Tuple[str, ...]:
        return tuple(edge.id for edge in self.edges)

    @cached_property
    def other_ids(self) -> Tuple[str, ...]:
        """Identifiers of ``E^{ef}`` in declaration order."""
        return tuple(i for i in self.edge_ids if i not in (self.marked_e, self.marked_f))

    @cached_property
    def endpoints(self) -> Tuple[Tuple[int, int], ...]:
        return tuple((edge.u, edge.v) for edge in self.edges)

    @cached_property
    def full_mask(self) -> int:
        return (1 << len(self.edges)) - 1

    @cached_property
    def e_bit(self) -> int:
        return 1 << self.index_of(self.marked_e)

    @cached_property
    def f_bit(self) -> int:
        return 1 << self.index_of(self.marked_f)

    @cached_property
    def ef_mask(self) -> int:
        return self.full_mask & ~(self.e_bit | self.f_bit)

    @cached_property
    def other_positions(self) -> Tuple[int, ...]:
        return tuple(self.index_of(i) for i in self.other_ids)

    # -- edge sets ------------------------------------------------------
    def edge_set(self, ids: Iterable[str], universe: Universe = Universe.EF) -> EdgeSet:
        mask = 0
        for edge_id in ids:
            mask |= 1 << self.index_of(edge_id)
        es = EdgeSet(mask, universe)
        self.check_edge_set(es)
        return es

    def check_edge_set(self, es: EdgeSet, universe: Optional[Universe] = None) -> None:
        """Reject masks with bits outside the declared (or requested) universe."""
        target = universe or es.universe
        allowed = self.full_mask if target is Universe.FULL else self.ef_mask
        if es.mask & ~allowed:
            raise GraphOperationError(
                f"edge set {self.ids_of(es, strict=False)} leaves universe {target.value}"
            )

    def ids_of(self, es: EdgeSet, strict: bool = True) -> Tuple[str, ...]:
        ids = []
        for pos in es:
            if pos >= len(self.edges):
                if strict:
                    raise GraphOperationError(f"bit {pos} beyond the edge list")
                ids.append(f"#{pos}")
                continue
            ids.append(self.edges[pos].id)
        return tuple(ids)

    def other_exponents(self, es: EdgeSet) -> Tuple[int, ...]:
        """0/1 exponent vector of ``es`` over ``E^{ef}`` in declaration order."""
        return tuple(1 if es.mask >> pos & 1 else 0 for pos in self.other_positions)

    def other_subsets(self) -> List[EdgeSet]:
        """All subsets of ``E^{ef}`` in ascending mask order."""
        positions = self.other_positions
        masks = []
        for combo in range(1 << len(positions)):
            mask = 0
            for i, pos in enumerate(positions):
                if combo >> i & 1:
                    mask |= 1 << pos
            masks.append(mask)
        return [EdgeSet(m) for m in sorted(masks)]

    def summary(self) -> Dict[str, object]:
        return {
            "vertices": self.vertex_count,
            "edges": len(self.edges),
            "e": self.marked_e,
            "f": self.marked_f,
        }


# ----------------------------------------------------------------------
# Parsing / formatting
# ----------------------------------------------------------------------
def parse_graph(text: str) -> Multigraph:
    """Parse the line format ``vertices``/``edge``/``mark`` with ``#`` comments."""
    vertex_count: Optional[int] = None
    edges: List[Edge] = []
    seen: Dict[str, int] = {}
    marks: Dict[str, str] = {}

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        keyword = tokens[0]
        if keyword == "vertices":
            if len(tokens) != 2:
                raise GraphParseError("expected 'vertices <n>'", line_no)
            if vertex_count is not None:
                raise GraphParseError("vertex count declared twice", line_no)
            vertex_count = _parse_int(tokens[1], line_no)
            if vertex_count < 1:
                raise VertexRangeError("vertex count must be positive", line_no)
        elif keyword == "edge":
            if len(tokens) != 4:
                raise GraphParseError("expected 'edge <id> <u> <v>'", line_no)
            edge_id = tokens[1]
            if not _EDGE_ID.match(edge_id):
                raise GraphParseError(f"invalid edge id {edge_id!r}", line_no)
            if edge_id == COUPLING_VARIABLE:
                raise GraphParseError("edge id 'q' is reserved for the coupling", line_no)
            if edge_id in seen:
                raise DuplicateEdgeError(
                    f"duplicate edge id {edge_id!r} (first on line {seen[edge_id]})", line_no
                )
            seen[edge_id] = line_no
            edges.append(
                Edge(edge_id, _parse_int(tokens[2], line_no), _parse_int(tokens[3], line_no))
            )
        elif keyword == "mark":
            if len(tokens) != 3 or tokens[1] not in ("e", "f"):
                raise MarkerError("expected 'mark e <id>' or 'mark f <id>'", line_no)
            if tokens[1] in marks:
                raise MarkerError(f"{tokens[1]} marked twice", line_no)
            marks[tokens[1]] = tokens[2]
        else:
            raise GraphParseError(f"unknown directive {keyword!r}", line_no)

    if vertex_count is None:
        raise GraphParseError("missing 'vertices' line")
    for edge in edges:
        for vertex in (edge.u, edge.v):
            if not 0 <= vertex < vertex_count:
                raise VertexRangeError(
                    f"edge {edge.id!r}: vertex {vertex} outside [0, {vertex_count})",
                    seen[edge.id],
                )
    for which in ("e", "f"):
        if which not in marks:
            raise MarkerError(f"{which} not marked")
        if marks[which] not in seen:
            raise MarkerError(f"marked {which} edge {marks[which]!r} is not declared")
    if marks["e"] == marks["f"]:
        raise MarkerError("e and f mark the same edge")

    return Multigraph(vertex_count, tuple(edges), marks["e"], marks["f"])


def _parse_int(token: str, line_no: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise GraphParseError(f"expected an integer, got {token!r}", line_no) from None


def read_graph(path: Union[str, Path]) -> Multigraph:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_graph(fh.read())


def format_graph(g: Multigraph) -> str:
    lines = [f"vertices {g.vertex_count}"]
    lines += [f"edge {edge.id} {edge.u} {edge.v}" for edge in g.edges]
    lines += [f"mark e {g.marked_e}", f"mark f {g.marked_f}"]
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------------
# Components, deletion, contraction
# ----------------------------------------------------------------------
def components(g: Multigraph, s: EdgeSet) -> Tuple[int, Tuple[int, ...]]:
    """Component count of ``(V, S)`` and per-vertex minimum-vertex labels."""
    g.check_edge_set(s, Universe.FULL)
    return label_components(g.vertex_count, (g.endpoints[pos] for pos in s))


def component_count(g: Multigraph, mask: int) -> int:
    return count_components(g.vertex_count, g.endpoints, mask)


def delete_edge(g: Multigraph, edge_id: str) -> Multigraph:
    if edge_id in (g.marked_e, g.marked_f):
        raise GraphOperationError(f"cannot delete marked edge {edge_id!r}")
    pos = g.index_of(edge_id)
    return Multigraph(
        g.vertex_count, g.edges[:pos] + g.edges[pos + 1 :], g.marked_e, g.marked_f
    )


def contract_edge(g: Multigraph, edge_id: str) -> Multigraph:
    """Merge the endpoints of ``edge_id`` into the lower one and relabel densely."""
    if edge_id in (g.marked_e, g.marked_f):
        raise GraphOperationError(f"cannot contract marked edge {edge_id!r}")
    target = g.edge(edge_id)
    if target.is_loop:
        raise GraphOperationError(f"cannot contract loop {edge_id!r}")
    keep, gone = sorted((target.u, target.v))

    def relabel(vertex: int) -> int:
        if vertex == gone:
            vertex = keep
        return vertex - 1 if vertex > gone else vertex

    edges = tuple(
        Edge(edge.id, relabel(edge.u), relabel(edge.v))
        for edge in g.edges
        if edge.id != edge_id
    )
    return Multigraph(g.vertex_count - 1, edges, g.marked_e, g.marked_f)


def swap_marks(g: Multigraph) -> Multigraph:
    return Multigraph(g.vertex_count, g.edges, g.marked_f, g.marked_e)


# ----------------------------------------------------------------------
# Seeded generation
# ----------------------------------------------------------------------
_EXTRA_LETTERS = [c for c in string.ascii_lowercase[6:] if c != COUPLING_VARIABLE]


def extra_edge_id(i: int) -> str:
    """``g, h, i, ...`` skipping ``q``, then ``g1, h1, ...``."""
    letter = _EXTRA_LETTERS[i % len(_EXTRA_LETTERS)]
    rnd = i // len(_EXTRA_LETTERS)
    return letter if rnd == 0 else f"{letter}{rnd}"


def vertex_pair(index: int, n: int) -> Tuple[int, int]:
    """Unordered pair ``(u <= v)`` number ``index`` in lexicographic order."""
    for u in range(n):
        row = n - u
        if index < row:
            return u, u + index
        index -= row
    raise ValueError("pair index out of range")


def random_multigraph(n: int, m: int, seed: int) -> Multigraph:
    if n < 2:
        raise ValueError(f"need at least two vertices, got {n}")
    if m < 0:
        raise ValueError(f"extra-edge count must be >= 0, got {m}")
    rng = SplitMix64(seed)

    def non_loop() -> Tuple[int, int]:
        u = rng.below(n)
        v = rng.below(n - 1)
        if v >= u:
            v += 1
        return min(u, v), max(u, v)

    edges = [Edge("e", *non_loop()), Edge("f", *non_loop())]
    pairs = n * (n + 1) // 2
    for i in range(m):
        edges.append(Edge(extra_edge_id(i), *vertex_pair(rng.below(pairs), n)))
    return Multigraph(n, tuple(edges), "e", "f")


def build_multigraph(
    n: int, e: Tuple[int, int], f: Tuple[int, int], others: Sequence[Tuple[int, int]]
) -> Multigraph:
    edges = [Edge("e", *e), Edge("f", *f)]
    edges += [Edge(extra_edge_id(i), u, v) for i, (u, v) in enumerate(others)]
    return Multigraph(n, tuple(edges), "e", "f")


__all__ = [
    "COUPLING_VARIABLE",
    "DuplicateEdgeError",
    "EMPTY",
    "Edge",
    "EdgeSet",
    "GraphOperationError",
    "GraphParseError",
    "MarkerError",
    "Multigraph",
    "Universe",
    "VertexRangeError",
    "build_multigraph",
    "component_count",
    "components",
    "contract_edge",
    "delete_edge",
    "extra_edge_id",
    "format_graph",
    "parse_graph",
    "random_multigraph",
    "read_graph",
    "swap_marks",
    "vertex_pair",
]
