"""(1 + eps)-approximate matching maintenance in a bounded-degree kernel.

Between rebuilds the matching is kept maximal: a matched edge that leaves
``H`` frees its endpoints, which immediately try their lowest-id free
neighbor, and a new ``H`` edge between two free vertices is matched.  Every
``ceil(eps * max(|M|, 1))`` kernel edge changes (or as soon as ``|M|`` halves within an
epoch) the matching is rebuilt by eliminating every augmenting path of
length at most ``2 * ceil(1/eps) - 1``.

Rebuild uses Hopcroft-Karp phases when ``H`` is bipartite.  Otherwise it
runs an exhaustive depth-bounded search over simple alternating paths,
which is exact for the bounded length without blossom contraction and
costs ``O(Delta ** ceil(1/eps))`` per free vertex.
"""

from __future__ import annotations

import math
from collections import deque
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Set

from .graph import Edge, Matching
from .sampler import KernelDelta

Adjacency = Sequence[Set[int]]


def max_augmenting_length(epsilon) -> int:
    return 2 * math.ceil(1 / Fraction(epsilon)) - 1


def two_coloring(adj: Adjacency) -> Optional[List[int]]:
    """Side (0/1) of every vertex, or ``None`` if some component has an odd cycle."""
    n = len(adj)
    color = [-1] * n
    for s in range(n):
        if color[s] != -1 or not adj[s]:
            continue
        color[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if color[v] == -1:
                    color[v] = color[u] ^ 1
                    queue.append(v)
                elif color[v] == color[u]:
                    return None
    return color


class _Counter:
    __slots__ = ("work",)

    def __init__(self):
        self.work = 0


def _augment_along(mate: Dict[int, int], path: List[int]) -> None:
    for i in range(0, len(path) - 1, 2):
        a, b = path[i], path[i + 1]
        mate[a] = b
        mate[b] = a


def _hopcroft_karp_bounded(
    adj: Adjacency, color: List[int], mate: Dict[int, int], max_len: int, ctr: _Counter
) -> None:
    n = len(adj)
    left = [u for u in range(n) if color[u] == 0 and adj[u]]
    nbrs = {u: sorted(adj[u]) for u in left}
    while True:
        dist: Dict[int, int] = {}
        queue = deque()
        for u in left:
            if u not in mate:
                dist[u] = 0
                queue.append(u)
        shortest = None
        while queue:
            u = queue.popleft()
            if shortest is not None and 2 * dist[u] + 1 > shortest:
                break
            for v in nbrs[u]:
                ctr.work += 1
                w = mate.get(v)
                if w is None:
                    if shortest is None:
                        shortest = 2 * dist[u] + 1
                elif w not in dist:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        if shortest is None or shortest > max_len:
            return
        limit = (shortest - 1) // 2
        used: Set[int] = set()

        def dfs(u: int) -> Optional[List[int]]:
            for v in nbrs[u]:
                ctr.work += 1
                if v in used:
                    continue
                w = mate.get(v)
                if w is None:
                    if dist[u] == limit:
                        used.add(v)
                        return [u, v]
                elif dist.get(w) == dist[u] + 1 and w not in used and dist[u] < limit:
                    used.add(v)
                    used.add(w)
                    rest = dfs(w)
                    if rest is not None:
                        return [u, v] + rest
            return None

        for u in left:
            if u in mate or dist.get(u) != 0 or u in used:
                continue
            used.add(u)
            path = dfs(u)
            if path is not None:
                _augment_along(mate, path)


def _exhaustive_bounded(
    adj: Adjacency, mate: Dict[int, int], max_len: int, ctr: _Counter
) -> None:
    n = len(adj)
    nbrs = [sorted(a) for a in adj]

    def search(x: int, length: int, path: List[int], on_path: Set[int]) -> Optional[List[int]]:
        for y in nbrs[x]:
            ctr.work += 1
            if y in on_path:
                continue
            z = mate.get(y)
            if z is None:
                return path + [y]
            if z in on_path or length + 3 > max_len:
                continue
            on_path.add(y)
            on_path.add(z)
            found = search(z, length + 2, path + [y, z], on_path)
            on_path.discard(y)
            on_path.discard(z)
            if found is not None:
                return found
        return None

    improved = True
    while improved:
        improved = False
        for r in range(n):
            if r in mate or not nbrs[r]:
                continue
            path = search(r, 0, [r], {r})
            if path is not None:
                _augment_along(mate, path)
                improved = True


def rebuild_matching(
    adj: Adjacency, epsilon, start: Iterable[Edge] = (), ctr: Optional[_Counter] = None
) -> Matching:
    """Matching of ``adj`` with no augmenting path of length <= 2*ceil(1/eps) - 1.

    ``start`` seeds the search with an existing matching of the same graph.
    """
    ctr = ctr or _Counter()
    max_len = max_augmenting_length(epsilon)
    mate: Dict[int, int] = {}
    for u, v in start:
        mate[u] = v
        mate[v] = u
    color = two_coloring(adj)
    if color is not None:
        _hopcroft_karp_bounded(adj, color, mate, max_len, ctr)
    else:
        _exhaustive_bounded(adj, mate, max_len, ctr)
    return Matching((u, v) for u, v in mate.items() if u < v)


class EpochState:
    """Lazy-rebuild matcher state for one kernel."""

    def __init__(self, epsilon, delta_cap: int):
        self.epsilon = Fraction(epsilon)
        self.delta_cap = delta_cap
        self.current = Matching()
        self.reference: Set[Edge] = set()
        self.epoch_budget = 1
        self.epoch_start_size = 0
        self.rebuilds = 0
        self.last_work = 0
        self.last_rebuilt = False
        self.on_rebuild: Optional[Callable[[Matching, Adjacency], None]] = None

    def _epoch_length(self) -> int:
        return max(1, math.ceil(self.epsilon * max(len(self.current), 1)))

    def _try_match(self, u: int, adj: Adjacency, ctr: _Counter) -> None:
        if u in self.current.mate:
            return
        best = None
        for v in adj[u]:
            ctr.work += 1
            if v not in self.current.mate and (best is None or v < best):
                best = v
        if best is not None:
            self.current.add(u, best)

    def apply(self, kd: KernelDelta, adj: Adjacency) -> int:
        """Fold one kernel delta into the matching; returns work units spent."""
        ctr = _Counter()
        cur = self.current
        freed: List[int] = []
        for u, v in kd.removed:
            ctr.work += 1
            self.reference.discard((u, v))
            if cur.mate.get(u) == v:
                cur.remove(u, v)
                freed.extend((u, v))
        for u, v in kd.added:
            ctr.work += 1
            if u not in cur.mate and v not in cur.mate:
                cur.add(u, v)
        for u in sorted(freed):
            self._try_match(u, adj, ctr)
        self.epoch_budget -= max(1, len(kd))
        self.last_rebuilt = False
        if self.epoch_budget <= 0 or 2 * len(cur) < self.epoch_start_size:
            self.rebuild(adj, ctr)
        self.last_work = ctr.work
        return ctr.work

    def rebuild(self, adj: Adjacency, ctr: Optional[_Counter] = None) -> Matching:
        ctr = ctr or _Counter()
        self.current = rebuild_matching(adj, self.epsilon, self.current.edges, ctr)
        self.reference = set(self.current.edges)
        self.epoch_budget = self._epoch_length()
        self.epoch_start_size = len(self.current)
        self.rebuilds += 1
        self.last_rebuilt = True
        if self.on_rebuild is not None:
            self.on_rebuild(self.current, adj)
        return self.current


def matcher_apply(st: EpochState, kd: KernelDelta, adj: Adjacency) -> int:
    return st.apply(kd, adj)


def rebuild(st: EpochState, adj: Adjacency) -> Matching:
    return st.rebuild(adj)
