"""Nice-partition maintenance and the fractional matching it induces.

Every vertex ``v`` has a level ``level[v]`` in ``[K, L]`` and, for every
incident edge ``e``, a shadow level ``shadow[v][u]`` (``e = (v, u)``).  The
edge level is the larger of its two shadow levels and the edge weight is
``beta ** -edge_level``.  The state satisfies, after every update:

* ``level[v] - 1 <= shadow[v][u] <= level[v] + 1``;
* the shadow levels of one vertex span at most two consecutive values;
* ``W_v < 1`` for every vertex;
* ``W_v >= 1 - 3/beta`` for every vertex above the floor level ``K``.

Repairs move one shadow level at a time.  A vertex with ``W_v >= 1`` raises
one of its lowest shadow levels, a vertex above the floor with too little
weight lowers one of its highest.  One such move changes ``W_v`` by at most
``1/beta``, strictly less than the ``3/beta`` band between the two
thresholds, so no vertex overshoots from one side of the band to the other.

Weights are never floats: internally ``W_v`` is an integer scaled by
``p ** (L + 1)`` where ``beta = p / q``; externally they are ``Fraction``.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Mapping, Optional, Tuple, Union

from .errors import (
    EpsilonTooSmall,
    InfeasibleFractional,
    InvariantViolation,
    LevelRangeError,
)
from .graph import DynamicGraph, Edge, edge

ANALYSED_FLOOR_LEVEL = 20

Number = Union[int, Fraction]


def as_fraction(x: Union[int, float, str, Fraction]) -> Fraction:
    """Exact rational from user input; floats go through their repr so 0.2 is 1/5."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def ceil_log(base: Fraction, x: Union[int, Fraction]) -> int:
    """Smallest integer ``k >= 0`` with ``base ** k >= x`` (exact)."""
    if base <= 1:
        raise ValueError("base must exceed 1")
    k = 0
    power = Fraction(1)
    while power < x:
        power *= base
        k += 1
    return k


@dataclass(frozen=True)
class PartitionParams:
    """Constants of the nice partition.

    ``beta`` is tied to ``epsilon`` by ``beta = 3 / epsilon`` when built with
    :meth:`from_epsilon`.  ``K`` defaults to the literature value 20, which
    only fits graphs with ``n >= beta ** 20``; desk-scale engines pass a
    small floor level explicitly.
    """

    beta: Fraction
    K: int
    L: int
    epsilon: Fraction

    def __post_init__(self):
        if self.beta < 5:
            raise ValueError(f"beta must be at least 5, got {self.beta}")
        if not (0 < self.epsilon <= Fraction(1, 2)):
            raise ValueError(f"epsilon must lie in (0, 1/2], got {self.epsilon}")
        if self.K < 1:
            raise ValueError("floor level K must be positive")

    @classmethod
    def from_epsilon(cls, epsilon, n: int, K: int = ANALYSED_FLOOR_LEVEL) -> "PartitionParams":
        eps = as_fraction(epsilon)
        if not (0 < eps <= Fraction(1, 2)):
            raise ValueError(f"epsilon must lie in (0, 1/2], got {eps}")
        beta = 3 / eps
        return cls(beta=beta, K=K, L=ceil_log(beta, n), epsilon=eps)

    @property
    def f(self) -> Fraction:
        return 1 - 3 / self.beta

    @property
    def top_shadow(self) -> int:
        return self.L + 1

    def weight_of_level(self, level: int) -> Fraction:
        return self.beta ** -level


@dataclass(frozen=True)
class WeightDelta:
    """One edge whose weight differs before and after an update (0 = absent)."""

    edge: Edge
    old_w: Fraction
    new_w: Fraction


def derive_cd(params: PartitionParams, n: int, *, strict: bool = False) -> Tuple[Fraction, Number]:
    """Approximate-maximality constants ``(c, d)`` of a nice partition.

    ``c = 1 + 2*epsilon`` and ``d = beta ** K'`` with
    ``K' = max(ceil(log_beta(18 c ln n / epsilon**2)), K + 1)``.

    When ``K' > L`` every edge level is at most ``L + 1 <= K'`` and the
    guarantee holds vacuously (all weights are at least ``1/d``).  With
    ``strict=True`` that situation raises :class:`EpsilonTooSmall` instead.
    """
    eps = params.epsilon
    c = 1 + 2 * eps
    target = 18 * c * math.log(n) / (eps * eps) if n > 1 else 0.0
    k_target = 0
    if target > 1:
        k_target = math.ceil(math.log(target) / math.log(params.beta))
        bf = float(params.beta)
        # guard the float ceil against boundary rounding
        while bf ** (k_target - 1) >= target:
            k_target -= 1
        while bf ** k_target < target:
            k_target += 1
    k_prime = max(k_target, params.K + 1)
    if strict and k_prime > params.L:
        raise EpsilonTooSmall(
            f"K'={k_prime} exceeds L={params.L}; n={n} is too small for epsilon={eps}"
        )
    d = params.beta ** k_prime
    return c, (d.numerator if d.denominator == 1 else d)


@lru_cache(maxsize=64)
def _exact_weights(beta: Fraction, top: int) -> Tuple[Fraction, ...]:
    return tuple(beta**-lvl for lvl in range(top + 1))


class LevelState:
    """Nice partition of a dynamic graph, maintained edge update by edge update."""

    def __init__(self, n: int, params: PartitionParams):
        if params.K > params.L:
            raise LevelRangeError(
                f"floor level K={params.K} exceeds L={params.L} for n={n}, beta={params.beta}"
            )
        self.n = n
        self.params = params
        K, top = params.K, params.top_shadow
        self._K = K
        self._top = top
        p, q = params.beta.numerator, params.beta.denominator
        self._unit = [q**lvl * p ** (top - lvl) for lvl in range(top + 1)]
        self._scale = p**top
        self._f_scaled = self._scale - 3 * q * p ** (top - 1)
        self._wtable = _exact_weights(params.beta, top + 1)

        self.level: List[int] = [K] * n
        self.shadow: List[Dict[int, int]] = [{} for _ in range(n)]
        self._count: List[Dict[int, int]] = [{} for _ in range(n)]
        self.edge_level: Dict[Edge, int] = {}
        self.weight: Dict[Edge, Fraction] = {}
        self.wsum: List[int] = [0] * n

        self._touched: Dict[Edge, Optional[int]] = {}
        self._dirty: List[int] = []
        self._queued: set = set()
        self.last_moves = 0
        self.last_work = 0
        self.total_moves = 0

    # ---- queries -------------------------------------------------------

    def W(self, v: int) -> Fraction:
        return Fraction(self.wsum[v], self._scale)

    def weights(self) -> Mapping[Edge, Fraction]:
        return self.weight

    @property
    def m(self) -> int:
        return len(self.edge_level)

    # ---- shadow bookkeeping --------------------------------------------

    def _min_shadow(self, v: int) -> int:
        return min(self._count[v])

    def _max_shadow(self, v: int) -> int:
        return max(self._count[v])

    def _refresh_level(self, v: int) -> None:
        cnt = self._count[v]
        self.level[v] = max(self._K, max(cnt) - 1) if cnt else self._K

    def _count_add(self, v: int, s: int, k: int) -> None:
        cnt = self._count[v]
        new = cnt.get(s, 0) + k
        if new:
            cnt[s] = new
        else:
            del cnt[s]

    def _set_edge_level(self, e: Edge, new_level: int) -> None:
        old_level = self.edge_level[e]
        if old_level == new_level:
            return
        self._touched.setdefault(e, old_level)
        diff = self._unit[new_level] - self._unit[old_level]
        self.edge_level[e] = new_level
        self.weight[e] = self._wtable[new_level]
        u, v = e
        self.wsum[u] += diff
        self.wsum[v] += diff
        self._mark(u)
        self._mark(v)

    def _move_shadow(self, v: int, u: int, s: int) -> None:
        old = self.shadow[v][u]
        self._count_add(v, old, -1)
        self._count_add(v, s, 1)
        self.shadow[v][u] = s
        self._refresh_level(v)
        self._set_edge_level(edge(u, v), max(s, self.shadow[u][v]))
        self._mark(v)

    # ---- dirtiness & repair ---------------------------------------------

    def _is_dirty(self, v: int) -> bool:
        w = self.wsum[v]
        return w >= self._scale or (self.level[v] > self._K and w < self._f_scaled)

    def _mark(self, v: int) -> None:
        if v not in self._queued and self._is_dirty(v):
            self._queued.add(v)
            heapq.heappush(self._dirty, v)

    def _step(self, v: int) -> None:
        nbrs = self.shadow[v]
        self.last_work += len(nbrs)
        if self.wsum[v] >= self._scale:
            s = self._min_shadow(v)
            if s >= self._top:
                raise InvariantViolation(f"vertex {v} overfull at top shadow level")
            best = best_pure = None
            for u, su in nbrs.items():
                if su != s:
                    continue
                if self.shadow[u][v] <= s:
                    if best is None or u < best:
                        best = u
                elif best_pure is None or u < best_pure:
                    best_pure = u
            self._move_shadow(v, best if best is not None else best_pure, s + 1)
        else:
            s = self._max_shadow(v)
            best = best_pure = None
            for u, su in nbrs.items():
                if su != s:
                    continue
                if self.shadow[u][v] < s:
                    if best is None or u < best:
                        best = u
                elif best_pure is None or u < best_pure:
                    best_pure = u
            self._move_shadow(v, best if best is not None else best_pure, s - 1)

    def _repair(self) -> None:
        guard = 4 * (self._top + 1) * (2 * len(self.edge_level) + self.n)
        moves = 0
        dirty, queued = self._dirty, self._queued
        while dirty:
            v = heapq.heappop(dirty)
            queued.discard(v)
            if not self._is_dirty(v):
                continue
            self._step(v)
            moves += 1
            if moves > guard:
                raise InvariantViolation(f"repair exceeded {guard} shadow moves")
        self.last_moves = moves
        self.total_moves += moves

    def _flush(self) -> List[WeightDelta]:
        deltas = []
        wt = self._wtable
        for e, old in self._touched.items():
            new = self.edge_level.get(e)
            if old != new:
                deltas.append(
                    WeightDelta(
                        e,
                        wt[old] if old is not None else Fraction(0),
                        wt[new] if new is not None else Fraction(0),
                    )
                )
        self._touched = {}
        return deltas

    # ---- updates -------------------------------------------------------

    def _entry_shadow(self, v: int) -> int:
        cnt = self._count[v]
        return max(cnt) if cnt else self._K

    def insert(self, u: int, v: int) -> List[WeightDelta]:
        """Add edge ``(u, v)`` and repair; returns the net weight changes."""
        e = edge(u, v)
        if e in self.edge_level:
            raise InvariantViolation(f"edge {e} already tracked")
        self.last_work = 0
        su, sv = self._entry_shadow(u), self._entry_shadow(v)
        self.shadow[u][v] = su
        self.shadow[v][u] = sv
        self._count_add(u, su, 1)
        self._count_add(v, sv, 1)
        lvl = max(su, sv)
        self._touched[e] = None
        self.edge_level[e] = lvl
        self.weight[e] = self._wtable[lvl]
        self.wsum[u] += self._unit[lvl]
        self.wsum[v] += self._unit[lvl]
        self._refresh_level(u)
        self._refresh_level(v)
        self._mark(u)
        self._mark(v)
        self._repair()
        return self._flush()

    def delete(self, u: int, v: int) -> List[WeightDelta]:
        """Remove edge ``(u, v)`` and repair; returns the net weight changes."""
        e = edge(u, v)
        if e not in self.edge_level:
            raise InvariantViolation(f"edge {e} not tracked")
        self.last_work = 0
        lvl = self.edge_level.pop(e)
        del self.weight[e]
        self._touched.setdefault(e, lvl)
        self.wsum[u] -= self._unit[lvl]
        self.wsum[v] -= self._unit[lvl]
        self._count_add(u, self.shadow[u].pop(v), -1)
        self._count_add(v, self.shadow[v].pop(u), -1)
        self._refresh_level(u)
        self._refresh_level(v)
        self._mark(u)
        self._mark(v)
        self._repair()
        return self._flush()


# ---- validators ------------------------------------------------------------


@dataclass
class PartitionReport:
    ok: bool
    property: str = ""
    witness: object = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


@lru_cache(maxsize=64)
def _scaled_units(beta: Fraction, top: int) -> Tuple[Tuple[int, ...], int]:
    p, q = beta.numerator, beta.denominator
    return tuple(q**lvl * p ** (top - lvl) for lvl in range(top + 1)), p**top


def check_nice_partition(st: LevelState, g: DynamicGraph) -> PartitionReport:
    """Recompute every nice-partition condition from the raw state.

    The stored ``wsum`` accumulators are not trusted: vertex weights are
    rebuilt from the stored per-edge weights after those are verified to be
    exact powers of ``1/beta``.
    """
    prm = st.params
    K, L, top = prm.K, prm.L, prm.top_shadow

    def bad(prop, witness, detail=""):
        return PartitionReport(False, prop, witness, detail)

    if len(st.edge_level) != g.m:
        return bad("edge-set", None, "tracked edge count differs from the graph")
    if st.weight.keys() != st.edge_level.keys():
        return bad("edge-set", None, "weight map differs from the edge set")
    # one level of headroom past the top shadow so corrupted levels still scale
    units, scale = _scaled_units(prm.beta, top + 1)
    exact = _exact_weights(prm.beta, top + 1)
    shadow, weight = st.shadow, st.weight
    wsum = [0] * st.n
    for e, lvl in st.edge_level.items():
        u, v = e
        su, sv = shadow[u].get(v, -1), shadow[v].get(u, -1)
        if lvl != (su if su > sv else sv):
            return bad("edge-level", e, f"stored {lvl}, shadows {su}/{sv}")
        if not (0 <= lvl <= top + 1):
            return bad("level-range", e, f"edge level {lvl} outside [0, {top + 1}]")
        w = weight[e]
        if w is not exact[lvl] and w != exact[lvl]:
            return bad("property-1", e, f"w={weight[e]} but level {lvl}")
        x = units[lvl]
        wsum[u] += x
        wsum[v] += x
    f_scaled = scale - 3 * prm.beta.denominator * prm.beta.numerator ** top
    for v in range(st.n):
        lv = st.level[v]
        if not (K <= lv <= L):
            return bad("level-range", v, f"level {lv} outside [{K}, {L}]")
        shadows = st.shadow[v]
        if shadows.keys() != g.adj[v].keys():
            return bad("shadow-set", v)
        if shadows:
            lo, hi = min(shadows.values()), max(shadows.values())
            if lo < 1 or lo < lv - 1 or hi > lv + 1:
                return bad("shadow-window", v, f"shadows [{lo}, {hi}] vs level {lv}")
            if hi - lo > 1:
                return bad("shadow-spread", v, f"shadows span [{lo}, {hi}]")
        if wsum[v] >= scale:
            return bad("property-2", v, f"W_v={Fraction(wsum[v], scale)}")
        if lv > K and wsum[v] < f_scaled:
            return bad("property-3", v, f"level {lv} with W_v={Fraction(wsum[v], scale)}")
    return PartitionReport(True)


def _common_scale(values, extra) -> int:
    den = 1
    for x in list(values) + list(extra):
        den = math.lcm(den, Fraction(x).denominator)
    return den


def approx_maximal_violation(
    g: DynamicGraph, w: Mapping[Edge, Number], c: Number, d: Number
) -> Optional[Edge]:
    """First edge breaking ``(c, d)``-approximate maximality, or ``None``.

    Raises :class:`InfeasibleFractional` if some vertex has ``W_v > 1``.
    """
    edges = list(g.edges())
    raw = [w.get(e, 0) for e in edges]
    # weight maps typically share a handful of value objects; key on identity
    # to avoid re-hashing Fractions, then scale to one common denominator
    by_id = {}
    for e, x in zip(edges, raw):
        if id(x) not in by_id:
            if x < 0:
                raise InfeasibleFractional(f"negative weight on {e}")
            by_id[id(x)] = x
    inv_c, inv_d = 1 / Fraction(c), 1 / Fraction(d)
    den = _common_scale(by_id.values(), (inv_c, inv_d))
    scale_of = {k: int(Fraction(x) * den) for k, x in by_id.items()}
    one, ic, id_ = den, int(inv_c * den), int(inv_d * den)

    n = g.n
    W = [0] * n
    heaviest = [0] * n
    scaled = []
    for e, x in zip(edges, raw):
        x = scale_of[id(x)]
        scaled.append(x)
        u, v = e
        W[u] += x
        W[v] += x
        if x > heaviest[u]:
            heaviest[u] = x
        if x > heaviest[v]:
            heaviest[v] = x
    for v in range(n):
        if W[v] > one:
            raise InfeasibleFractional(f"W_{v} = {Fraction(W[v], den)} > 1")

    def witness(v):
        return W[v] >= ic and heaviest[v] <= id_

    for e, x in zip(edges, scaled):
        if x >= id_:
            continue
        u, v = e
        if not (witness(u) or witness(v)):
            return e
    return None


def check_approx_maximal(
    g: DynamicGraph, w: Mapping[Edge, Number], c: Number, d: Number
) -> bool:
    """Whether ``w`` is a ``(c, d)``-approximately-maximal fractional matching."""
    return approx_maximal_violation(g, w, c, d) is None
