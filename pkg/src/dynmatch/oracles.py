"""Reference computations used to check the engine.

Nothing here shares code with the engine's own matching routines: the
bipartite oracle is a plain Hopcroft-Karp, general graphs go through an
edge-ordered branch and bound, and augmenting paths are found by brute
force.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple, Union

from .errors import InfeasibleWitness, TooLarge
from .graph import DynamicGraph, Edge, Matching, edge

Number = Union[int, Fraction]


@dataclass(frozen=True)
class OracleLimits:
    max_edges_exhaustive: int = 24
    max_n_bipartite: int = 5000


DEFAULT_LIMITS = OracleLimits()


def bipartition(g: DynamicGraph) -> Optional[List[int]]:
    side = [-1] * g.n
    for s in range(g.n):
        if side[s] != -1:
            continue
        side[s] = 0
        stack = [s]
        while stack:
            u = stack.pop()
            for v in g.adj[u]:
                if side[v] == -1:
                    side[v] = 1 - side[u]
                    stack.append(v)
                elif side[v] == side[u]:
                    return None
    return side


def bipartite_max_matching(g: DynamicGraph, side: Sequence[int]) -> Matching:
    """Maximum matching of a bipartite graph (Hopcroft-Karp, iterative DFS)."""
    left = [u for u in range(g.n) if side[u] == 0 and g.adj[u]]
    adj = {u: list(g.adj[u]) for u in left}
    mate: Dict[int, int] = {}
    inf = float("inf")
    while True:
        dist = {}
        q = deque()
        for u in left:
            if u not in mate:
                dist[u] = 0
                q.append(u)
        found = False
        while q:
            u = q.popleft()
            for v in adj[u]:
                w = mate.get(v)
                if w is None:
                    found = True
                elif w not in dist:
                    dist[w] = dist[u] + 1
                    q.append(w)
        if not found:
            break
        ptr = {u: 0 for u in left}
        for root in left:
            if root in mate:
                continue
            # iterative layered DFS from a free left vertex
            path = [root]
            while path:
                u = path[-1]
                advanced = False
                while ptr[u] < len(adj[u]):
                    v = adj[u][ptr[u]]
                    ptr[u] += 1
                    w = mate.get(v)
                    if w is None:
                        # flip the path: each left vertex takes the right
                        # vertex its successor is giving up
                        prev_right = v
                        for a in reversed(path):
                            nxt = mate.get(a)
                            mate[a] = prev_right
                            mate[prev_right] = a
                            prev_right = nxt
                        path = []
                        advanced = True
                        break
                    if dist.get(w, inf) == dist[u] + 1:
                        path.append(w)
                        advanced = True
                        break
                if not path:
                    break
                if not advanced:
                    dist[u] = inf
                    path.pop()
    return Matching((u, v) for u, v in mate.items() if side[u] == 0)


def _edge_list(g: DynamicGraph) -> List[Edge]:
    return sorted(g.edges())


def _branch_and_bound(
    n: int, edges: List[Edge], weight: Sequence[Number]
) -> Tuple[Number, List[int]]:
    """Best-weight matching over ``edges`` by include/exclude branching in id order."""
    m = len(edges)
    # suffix sums of positive weights bound what the remaining edges can add
    suffix = [0] * (m + 1)
    for i in range(m - 1, -1, -1):
        suffix[i] = suffix[i + 1] + max(weight[i], 0)
    used = [False] * n
    best_val: List[Number] = [0]
    best_set: List[List[int]] = [[]]
    chosen: List[int] = []

    def rec(i: int, val: Number) -> None:
        if val > best_val[0]:
            best_val[0] = val
            best_set[0] = list(chosen)
        if i == m or val + suffix[i] <= best_val[0]:
            return
        u, v = edges[i]
        if not used[u] and not used[v] and weight[i] > 0:
            used[u] = used[v] = True
            chosen.append(i)
            rec(i + 1, val + weight[i])
            chosen.pop()
            used[u] = used[v] = False
        rec(i + 1, val)

    rec(0, 0)
    return best_val[0], best_set[0]


def _card_branch_and_bound(n: int, edges: List[Edge]) -> List[int]:
    """Maximum-cardinality variant, bounded by free vertices with remaining edges."""
    m = len(edges)
    used = [False] * n
    best: List[List[int]] = [[]]
    chosen: List[int] = []
    ceiling = n // 2

    def bound(i: int) -> int:
        live = set()
        count = 0
        for j in range(i, m):
            u, v = edges[j]
            if not used[u] and not used[v]:
                count += 1
                live.add(u)
                live.add(v)
        return min(count, len(live) // 2)

    def rec(i: int) -> bool:
        if len(chosen) > len(best[0]):
            best[0] = list(chosen)
            if len(chosen) == ceiling:
                return True
        if i == m or len(chosen) + bound(i) <= len(best[0]):
            return False
        u, v = edges[i]
        if not used[u] and not used[v]:
            used[u] = used[v] = True
            chosen.append(i)
            done = rec(i + 1)
            chosen.pop()
            used[u] = used[v] = False
            if done:
                return True
        return rec(i + 1)

    rec(0)
    return best[0]


def max_matching(g: DynamicGraph, limits: OracleLimits = DEFAULT_LIMITS) -> Matching:
    """An exact maximum matching of ``g``."""
    side = bipartition(g)
    if side is not None and g.n <= limits.max_n_bipartite:
        return bipartite_max_matching(g, side)
    edges = _edge_list(g)
    if len(edges) > limits.max_edges_exhaustive:
        raise TooLarge(
            f"{len(edges)} edges exceed the exhaustive limit {limits.max_edges_exhaustive}"
        )
    return Matching(edges[i] for i in _card_branch_and_bound(g.n, edges))


def exact_max_matching(g: DynamicGraph, limits: OracleLimits = DEFAULT_LIMITS) -> int:
    """Matching number ``mu(g)``."""
    return len(max_matching(g, limits))


def exhaustive_max_matching(g: DynamicGraph, limits: OracleLimits = DEFAULT_LIMITS) -> int:
    """``mu(g)`` by branch and bound only, even for bipartite input."""
    edges = _edge_list(g)
    if len(edges) > limits.max_edges_exhaustive:
        raise TooLarge(f"{len(edges)} edges exceed the exhaustive limit")
    return len(_card_branch_and_bound(g.n, edges))


def exact_mwm(
    g: DynamicGraph, weights: Mapping[Edge, Number], limits: OracleLimits = DEFAULT_LIMITS
) -> Tuple[Matching, Number]:
    """Maximum-weight matching and its weight, by exhaustive search."""
    edges = _edge_list(g)
    if len(edges) > limits.max_edges_exhaustive:
        raise TooLarge(
            f"{len(edges)} edges exceed the exhaustive limit {limits.max_edges_exhaustive}"
        )
    w = [weights[e] for e in edges]
    val, idx = _branch_and_bound(g.n, edges, w)
    return Matching(edges[i] for i in idx), val


def greedy_maximal_matching(g: DynamicGraph) -> Matching:
    m = Matching()
    for u, v in _edge_list(g):
        if u not in m.mate and v not in m.mate:
            m.add(u, v)
    return m


def mu_upper_bound(g: DynamicGraph) -> int:
    """``2 |greedy maximal|``, an upper bound on ``mu`` for any graph."""
    return 2 * len(greedy_maximal_matching(g))


# ---- kernels -------------------------------------------------------------


def _degrees(n: int, h_edges: Iterable[Edge]) -> List[int]:
    deg = [0] * n
    for u, v in h_edges:
        deg[u] += 1
        deg[v] += 1
    return deg


def is_kernel(g: DynamicGraph, h_edges: Iterable[Edge], c: Number, d: Number) -> bool:
    """Whether ``h_edges`` form a ``(c, d)``-kernel of ``g``."""
    h = {edge(*e) for e in h_edges}
    if any(not g.has_edge(u, v) for u, v in h):
        return False
    deg = _degrees(g.n, h)
    if max(deg, default=0) > d:
        return False
    threshold = Fraction(d) / Fraction(c)
    for e in g.edges():
        if e not in h and max(deg[e[0]], deg[e[1]]) < threshold:
            return False
    return True


def random_kernel(
    g: DynamicGraph, c: Number, d: int, rng: random.Random
) -> Set[Edge]:
    """A ``(c, d)``-kernel of ``g`` built greedily over a shuffled edge order.

    An edge is taken whenever both endpoints still have degree below ``d``;
    every skipped edge then has an endpoint of degree exactly ``d``.  A few
    kernel edges are then dropped at random while the result stays a kernel,
    so that tests do not only see maximal ones.
    """
    order = _edge_list(g)
    rng.shuffle(order)
    deg = [0] * g.n
    h: Set[Edge] = set()
    for u, v in order:
        if deg[u] < d and deg[v] < d:
            h.add((u, v))
            deg[u] += 1
            deg[v] += 1
    for e in sorted(h):
        if rng.random() < 0.3:
            h.discard(e)
            if not is_kernel(g, h, c, d):
                h.add(e)
    return h


def kernel_witness_value(
    h_edges: Iterable[Edge],
    dH: Sequence[int],
    m_star: Iterable[Edge],
    d: Number,
    *,
    c: Optional[Number] = None,
    mu: Optional[int] = None,
) -> Fraction:
    """Total value of the fractional witness inside a kernel ``H``.

    Edges of ``H`` outside ``M*`` get ``1/d``; an edge ``(u, v)`` of both gets
    ``max(1 - (dH(u) + dH(v) - 2)/d, 0)``.  Raises :class:`InfeasibleWitness`
    if some vertex ends above one, or, when ``c`` and ``mu`` are given, if
    the value falls below ``mu / (2c)``.
    """
    d = Fraction(d)
    star = {edge(*e) for e in m_star}
    load: Dict[int, Fraction] = {}
    total = Fraction(0)
    for e in {edge(*e) for e in h_edges}:
        u, v = e
        if e in star:
            f = max(1 - Fraction(dH[u] + dH[v] - 2) / d, Fraction(0))
        else:
            f = 1 / d
        total += f
        load[u] = load.get(u, 0) + f
        load[v] = load.get(v, 0) + f
    for v, x in load.items():
        if x > 1:
            raise InfeasibleWitness(f"witness load {x} > 1 at vertex {v}")
    if c is not None and mu is not None and total < Fraction(mu) / (2 * Fraction(c)):
        raise InfeasibleWitness(f"witness value {total} < mu/(2c) = {Fraction(mu, 1) / (2 * Fraction(c))}")
    return total


def verify_kernel_matching_bound(
    g: DynamicGraph,
    h_edges: Iterable[Edge],
    c: Number,
    d: Number,
    limits: OracleLimits = DEFAULT_LIMITS,
) -> bool:
    """Whether ``mu(H) >= mu(G) / (2c (1 + 1/d))``."""
    h = DynamicGraph.from_edges(g.n, {edge(*e) for e in h_edges})
    mu_h = exact_max_matching(h, limits)
    mu_g = exact_max_matching(g, limits)
    return mu_h * 2 * Fraction(c) * (1 + 1 / Fraction(d)) >= mu_g


def fractional_value_bound(
    g: DynamicGraph,
    w: Mapping[Edge, Number],
    c: Number,
    d: Number,
    limits: OracleLimits = DEFAULT_LIMITS,
) -> bool:
    """Whether ``sum(w) >= mu(G) / (2 max(c, d))``."""
    total = sum((Fraction(w.get(e, 0)) for e in g.edges()), Fraction(0))
    mu = exact_max_matching(g, limits)
    return total * 2 * max(Fraction(c), Fraction(d)) >= mu


# ---- augmenting paths ----------------------------------------------------


def find_augmenting_path(
    adj: Sequence[Iterable[int]], matching: Iterable[Edge], max_len: int
) -> Optional[List[int]]:
    """Some augmenting path with at most ``max_len`` edges, or ``None``.

    Plain enumeration of simple alternating paths from every exposed vertex.
    """
    mate: Dict[int, int] = {}
    for u, v in matching:
        mate[u] = v
        mate[v] = u
    n = len(adj)
    nbrs = [list(a) for a in adj]

    def extend(path: List[int], seen: Set[int]) -> Optional[List[int]]:
        x = path[-1]
        edges_used = len(path) - 1
        for y in nbrs[x]:
            if y in seen:
                continue
            if y not in mate:
                return path + [y]
            z = mate[y]
            if z in seen or edges_used + 3 > max_len:
                continue
            seen.update((y, z))
            got = extend(path + [y, z], seen)
            seen.difference_update((y, z))
            if got:
                return got
        return None

    for r in range(n):
        if r in mate or not nbrs[r]:
            continue
        p = extend([r], {r})
        if p:
            return p
    return None
