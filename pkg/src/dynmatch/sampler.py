"""Sampled bounded-degree kernel driven by fractional weight changes.

Each edge whose fractional weight changes is re-drawn with probability
``min(1, w_e * d)``.  Every vertex keeps its sampled incident edges in
sample-time order; only the first ``floor((1 + eps) * d)`` of them are
*allowed*, and the kernel ``H`` consists of the sampled edges allowed by
both endpoints.  The allow-list is split into an ``allowed`` prefix and an
``overflow`` tail so that removing an allowed edge promotes the oldest
overflow edge in O(1).

Coins come from BLAKE2b keyed with the run seed and applied to the tuple
``(u, v, insertion epoch, draw index)``, giving every edge slot its own
reproducible substream independent of processing order.
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Set, Union

from .graph import DynamicGraph, Edge
from .partition import WeightDelta, as_fraction

Number = Union[int, Fraction]

_PACK = struct.Struct("<4Q")
_TWO64 = 1 << 64


def sample_probability(w_e: Number, d: Number) -> Fraction:
    """``min(1, w_e * d)`` as an exact rational."""
    if w_e < 0 or w_e > 1:
        raise ValueError(f"weight {w_e} outside [0, 1]")
    p = Fraction(w_e) * Fraction(d)
    return p if p < 1 else Fraction(1)


@dataclass(frozen=True)
class SamplerConfig:
    d: Number
    c: Fraction
    epsilon: Fraction
    seed: int = 0

    @property
    def cap(self) -> int:
        """Hard per-vertex degree cap ``floor((1 + eps) * d)``."""
        return math.floor((1 + self.epsilon) * Fraction(self.d))

    def satisfies_hypothesis(self, n: int) -> bool:
        """Whether ``d >= 9 c ln n / eps**2`` (void under a desk-scale override)."""
        return float(self.d) >= 9 * float(self.c) * math.log(max(n, 1)) / float(self.epsilon) ** 2


@dataclass
class KernelDelta:
    added: List[Edge] = field(default_factory=list)
    removed: List[Edge] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.added) + len(self.removed)


class Kernel:
    """Allow-list kernel ``H`` over a fixed vertex universe."""

    def __init__(self, n: int, config: SamplerConfig):
        self.n = n
        self.config = config
        self.cap = config.cap
        self._d = Fraction(config.d)
        self.allowed: List[Dict[int, None]] = [{} for _ in range(n)]
        self.overflow: List[Dict[int, None]] = [{} for _ in range(n)]
        self.h_adj: List[Set[int]] = [set() for _ in range(n)]
        self.H_edges: Set[Edge] = set()
        self.deg_H: List[int] = [0] * n
        self._is_sampled: Set[Edge] = set()
        self._epoch: Dict[Edge, int] = {}
        self._draws: Dict[Edge, int] = {}
        self._key = struct.pack("<Q", config.seed & (_TWO64 - 1))
        self._changes: Dict[Edge, bool] = {}

    # ---- randomness ------------------------------------------------------

    def coin(self, e: Edge, epoch: int, draw: int) -> int:
        """Uniform 64-bit integer for one draw of edge slot ``(e, epoch)``."""
        h = hashlib.blake2b(_PACK.pack(e[0], e[1], epoch, draw), digest_size=8, key=self._key)
        return int.from_bytes(h.digest(), "little")

    def _draw(self, e: Edge, w: Fraction) -> bool:
        p = sample_probability(w, self._d)
        if p >= 1:
            return True
        if p == 0:
            return False
        k = self._draws.get(e, 0)
        self._draws[e] = k + 1
        r = self.coin(e, self._epoch[e], k)
        return r * p.denominator < p.numerator * _TWO64

    # ---- queries ---------------------------------------------------------

    def sampled(self, v: int) -> List[int]:
        """Neighbors of ``v`` over sampled edges, in sample-time order."""
        return list(self.allowed[v]) + list(self.overflow[v])

    def is_sampled(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self._is_sampled

    def sampled_edges(self) -> Set[Edge]:
        return set(self._is_sampled)

    def max_degree(self) -> int:
        return max(self.deg_H, default=0)

    # ---- structure maintenance ------------------------------------------

    def _h_set(self, e: Edge, present: bool) -> None:
        u, v = e
        if present:
            self.H_edges.add(e)
            self.h_adj[u].add(v)
            self.h_adj[v].add(u)
            self.deg_H[u] += 1
            self.deg_H[v] += 1
        else:
            self.H_edges.remove(e)
            self.h_adj[u].discard(v)
            self.h_adj[v].discard(u)
            self.deg_H[u] -= 1
            self.deg_H[v] -= 1
        self._changes.setdefault(e, not present)

    def _sample(self, e: Edge) -> None:
        self._is_sampled.add(e)
        u, v = e
        for x, y in ((u, v), (v, u)):
            if len(self.allowed[x]) < self.cap:
                self.allowed[x][y] = None
            else:
                self.overflow[x][y] = None
        if v in self.allowed[u] and u in self.allowed[v]:
            self._h_set(e, True)

    def _unsample(self, e: Edge) -> None:
        self._is_sampled.discard(e)
        if e in self.H_edges:
            self._h_set(e, False)
        u, v = e
        for x, y in ((u, v), (v, u)):
            if y in self.allowed[x]:
                del self.allowed[x][y]
                over = self.overflow[x]
                if over:
                    z = next(iter(over))
                    del over[z]
                    self.allowed[x][z] = None
                    if x in self.allowed[z]:
                        self._h_set((min(x, z), max(x, z)), True)
            else:
                self.overflow[x].pop(y, None)

    def apply_weight_deltas(self, deltas: Iterable[WeightDelta]) -> KernelDelta:
        """Re-sample every edge in ``deltas`` and report net changes to ``H``."""
        self._changes = {}
        for delta in deltas:
            e = delta.edge
            if delta.old_w == 0:
                self._epoch[e] = self._epoch.get(e, 0) + 1
                self._draws[e] = 0
            if delta.new_w == 0:
                if e in self._is_sampled:
                    self._unsample(e)
                self._draws.pop(e, None)
                continue
            keep = self._draw(e, delta.new_w)
            if keep and e not in self._is_sampled:
                self._sample(e)
            elif not keep and e in self._is_sampled:
                self._unsample(e)
        kd = KernelDelta()
        for e, was_present in self._changes.items():
            now = e in self.H_edges
            if now and not was_present:
                kd.added.append(e)
            elif was_present and not now:
                kd.removed.append(e)
        self._changes = {}
        return kd

    def snapshot(self) -> DynamicGraph:
        return DynamicGraph.from_edges(self.n, sorted(self.H_edges))


def apply_weight_deltas(k: Kernel, deltas: Iterable[WeightDelta]) -> KernelDelta:
    return k.apply_weight_deltas(deltas)


@dataclass
class KernelReport:
    max_deg: int
    cap: int
    cap_violations: List[int]
    foreign_edges: List[Edge]
    inconsistent_edges: List[Edge]
    excluded: int
    unsatisfied: List[Edge]
    threshold: Fraction

    @property
    def structurally_ok(self) -> bool:
        """Hard properties: degree cap, ``H`` inside ``G``, allow-list semantics."""
        return not (self.cap_violations or self.foreign_edges or self.inconsistent_edges)

    @property
    def unsatisfied_fraction(self) -> float:
        return len(self.unsatisfied) / self.excluded if self.excluded else 0.0


def check_kernel(
    g: DynamicGraph, k: Kernel, c: Number, d: Number, epsilon: Number
) -> KernelReport:
    """Audit ``k`` against ``g``.

    Hard failures (degree cap, foreign edges, allow-list mismatch) are listed
    separately from the probabilistic kernel property: excluded edges with
    both endpoints below ``(1 - eps) d / c`` are only counted.
    """
    eps = as_fraction(epsilon)
    threshold = (1 - eps) * Fraction(d) / Fraction(c)
    deg = [0] * k.n
    foreign, inconsistent = [], []
    for e in k.H_edges:
        u, v = e
        deg[u] += 1
        deg[v] += 1
        if not g.has_edge(u, v):
            foreign.append(e)
        if not (v in k.allowed[u] and u in k.allowed[v]):
            inconsistent.append(e)
    if deg != k.deg_H:
        inconsistent.append((-1, -1))
    for v in range(k.n):
        if len(k.allowed[v]) > k.cap or (k.overflow[v] and len(k.allowed[v]) < k.cap):
            inconsistent.append((v, v))
    cap_violations = [v for v in range(k.n) if deg[v] > k.cap]
    excluded = 0
    unsatisfied = []
    for e in g.edges():
        if e in k.H_edges:
            continue
        excluded += 1
        u, v = e
        if v in k.allowed[u] and u in k.allowed[v]:
            inconsistent.append(e)
        if max(deg[u], deg[v]) < threshold:
            unsatisfied.append(e)
    return KernelReport(
        max_deg=max(deg, default=0),
        cap=k.cap,
        cap_violations=cap_violations,
        foreign_edges=foreign,
        inconsistent_edges=inconsistent,
        excluded=excluded,
        unsatisfied=unsatisfied,
        threshold=threshold,
    )
