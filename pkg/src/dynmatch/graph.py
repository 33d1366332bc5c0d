"""Dynamic simple graph over a fixed vertex universe, plus matchings."""

from __future__ import annotations

from typing import Dict, Iterable, Iterator, List, Optional, Set, Tuple

from .errors import DuplicateEdge, InvalidVertex, MissingEdge, SelfLoop

Edge = Tuple[int, int]


def edge(u: int, v: int) -> Edge:
    """Canonical (sorted) form of the unordered pair ``{u, v}``."""
    return (u, v) if u < v else (v, u)


class DynamicGraph:
    """Undirected simple graph on vertices ``0 .. n-1``.

    Adjacency is kept as one insertion-ordered dict per vertex, so iteration
    order is reproducible across runs.
    """

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("vertex universe must be non-empty")
        self.n = n
        self.adj: List[Dict[int, None]] = [{} for _ in range(n)]
        self.m = 0

    def _check(self, u: int, v: int) -> Edge:
        for x in (u, v):
            if not (0 <= x < self.n):
                raise InvalidVertex(f"vertex {x} outside [0, {self.n})")
        if u == v:
            raise SelfLoop(f"self-loop at {u}")
        return edge(u, v)

    def check_insertable(self, u: int, v: int) -> Edge:
        e = self._check(u, v)
        if v in self.adj[u]:
            raise DuplicateEdge(f"edge {e} already present")
        return e

    def check_deletable(self, u: int, v: int) -> Edge:
        e = self._check(u, v)
        if v not in self.adj[u]:
            raise MissingEdge(f"edge {e} not present")
        return e

    def insert_edge(self, u: int, v: int) -> Edge:
        e = self.check_insertable(u, v)
        self.adj[u][v] = None
        self.adj[v][u] = None
        self.m += 1
        return e

    def delete_edge(self, u: int, v: int) -> Edge:
        e = self.check_deletable(u, v)
        del self.adj[u][v]
        del self.adj[v][u]
        self.m -= 1
        return e

    def has_edge(self, u: int, v: int) -> bool:
        return 0 <= u < self.n and v in self.adj[u]

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def neighbors(self, v: int) -> Iterable[int]:
        return self.adj[v].keys()

    def edges(self) -> Iterator[Edge]:
        for u, nbrs in enumerate(self.adj):
            for v in nbrs:
                if u < v:
                    yield (u, v)

    def is_symmetric(self) -> bool:
        total = 0
        for u, nbrs in enumerate(self.adj):
            total += len(nbrs)
            for v in nbrs:
                if u not in self.adj[v]:
                    return False
        return total == 2 * self.m

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Tuple[int, int]]) -> "DynamicGraph":
        g = cls(n)
        for u, v in edges:
            g.insert_edge(u, v)
        return g

    def copy(self) -> "DynamicGraph":
        return DynamicGraph.from_edges(self.n, self.edges())

    def __len__(self) -> int:
        return self.m

    def __repr__(self) -> str:
        return f"DynamicGraph(n={self.n}, m={self.m})"


class Matching:
    """Integral matching stored as an edge set with a mate map."""

    def __init__(self, edges: Iterable[Tuple[int, int]] = ()):
        self.edges: Set[Edge] = set()
        self.mate: Dict[int, int] = {}
        for u, v in edges:
            self.add(u, v)

    def add(self, u: int, v: int) -> None:
        if u == v or u in self.mate or v in self.mate:
            raise ValueError(f"cannot add ({u}, {v}): endpoint already matched")
        self.mate[u] = v
        self.mate[v] = u
        self.edges.add(edge(u, v))

    def remove(self, u: int, v: int) -> None:
        e = edge(u, v)
        self.edges.remove(e)
        del self.mate[u]
        del self.mate[v]

    def discard_vertex(self, u: int) -> Optional[Edge]:
        v = self.mate.get(u)
        if v is None:
            return None
        self.remove(u, v)
        return edge(u, v)

    def is_matched(self, u: int) -> bool:
        return u in self.mate

    def partner(self, u: int) -> Optional[int]:
        return self.mate.get(u)

    def copy(self) -> "Matching":
        return Matching(self.edges)

    def __contains__(self, e: Tuple[int, int]) -> bool:
        return edge(*e) in self.edges

    def __len__(self) -> int:
        return len(self.edges)

    def __iter__(self) -> Iterator[Edge]:
        return iter(sorted(self.edges))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Matching) and self.edges == other.edges

    def __repr__(self) -> str:
        return f"Matching({sorted(self.edges)})"


def matching_is_valid(g: DynamicGraph, edges: Iterable[Tuple[int, int]]) -> bool:
    """True iff every edge exists in ``g`` and no vertex is covered twice.

    Accepts a :class:`Matching` or any iterable of pairs, so that a matching
    whose internal mate map might be corrupt is still judged on its edges.
    """
    seen: Set[int] = set()
    for u, v in edges:
        if u == v or not g.has_edge(u, v):
            return False
        if u in seen or v in seen:
            return False
        seen.add(u)
        seen.add(v)
    return True
