"""Maximum-weight matching via geometric weight classes.

Edge weights are bucketed into classes ``((1+eps)**i, (1+eps)**(i+1)]``.
Each class runs its own cardinality :class:`~dynmatch.engine.Engine` on
the subgraph of its edges.  A query merges the class matchings greedily
from the heaviest class down.  Edges lighter than ``eps/n`` times the
current maximum weight are parked outside every engine.
"""

from __future__ import annotations

import hashlib
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Optional, Set, Tuple, Union

from .engine import DESK_FLOOR_LEVEL, Engine, UpdateReport
from .errors import NonPositiveWeight
from .graph import DynamicGraph, Edge, Matching, edge
from .partition import as_fraction

Number = Union[int, Fraction]


@dataclass(frozen=True)
class WeightClassIndex:
    i: int
    epsilon: Fraction

    @property
    def range(self) -> Tuple[Fraction, Fraction]:
        b = 1 + self.epsilon
        return b**self.i, b ** (self.i + 1)

    def __contains__(self, x) -> bool:
        lo, hi = self.range
        return lo < x <= hi


@dataclass(frozen=True)
class WeightedEdge:
    edge: Edge
    weight: Fraction

    def __post_init__(self):
        if self.weight <= 0:
            raise NonPositiveWeight(f"weight {self.weight} on {self.edge} is not positive")


def _log(x: Fraction) -> float:
    return math.log(x.numerator) - math.log(x.denominator)


def class_of(x, epsilon) -> WeightClassIndex:
    """The class ``i`` with ``(1+eps)**i < x <= (1+eps)**(i+1)``."""
    x = as_fraction(x)
    if x <= 0:
        raise NonPositiveWeight(f"weight {x} is not positive")
    eps = as_fraction(epsilon)
    b = 1 + eps
    i = math.ceil(_log(x) / _log(b)) - 1
    # the float guess can be off by one near a boundary
    while b ** (i + 1) < x:
        i += 1
    while b**i >= x:
        i -= 1
    return WeightClassIndex(i, eps)


def greedy_merge(class_matchings: Mapping[int, Iterable[Edge]]) -> Matching:
    """Union of class matchings, heaviest class first, skipping conflicts."""
    out = Matching()
    for i in sorted(class_matchings, reverse=True):
        for u, v in sorted(edge(*e) for e in class_matchings[i]):
            if u not in out.mate and v not in out.mate:
                out.add(u, v)
    return out


def _class_seed(seed: int, i: int) -> int:
    h = hashlib.blake2b(f"{seed}:{i}".encode(), digest_size=8)
    return int.from_bytes(h.digest(), "little")


class MWMEngine:
    """Dynamic weighted matching built from per-class cardinality engines."""

    def __init__(
        self,
        n: int,
        epsilon=Fraction(1, 2),
        seed: int = 0,
        d_override: Optional[int] = None,
        floor_level: int = DESK_FLOOR_LEVEL,
    ):
        self.n = n
        self.epsilon = as_fraction(epsilon)
        self.seed = seed
        self.d_override = d_override
        self.floor_level = floor_level
        self.graph = DynamicGraph(n)
        self.weight: Dict[Edge, Fraction] = {}
        self.home: Dict[Edge, Optional[int]] = {}  # class index, None if parked
        self.engines: Dict[int, Engine] = {}
        self._weights: Counter = Counter()
        self._threshold_max: Optional[Fraction] = None
        self.on_rebuild = None  # forwarded to every class matcher

    # ---- bookkeeping -----------------------------------------------------

    def max_weight(self) -> Optional[Fraction]:
        return max(self._weights) if self._weights else None

    def cutoff(self) -> Fraction:
        mx = self.max_weight()
        return Fraction(0) if mx is None else self.epsilon / self.n * mx

    def _engine(self, i: int) -> Engine:
        eng = self.engines.get(i)
        if eng is None:
            eng = Engine(
                self.n,
                self.epsilon,
                seed=_class_seed(self.seed, i),
                d_override=self.d_override,
                floor_level=self.floor_level,
            )
            eng.matcher.on_rebuild = self.on_rebuild
            self.engines[i] = eng
        return eng

    def _activate(self, e: Edge) -> UpdateReport:
        i = class_of(self.weight[e], self.epsilon).i
        rep = self._engine(i).insert(*e)
        self.home[e] = i
        return rep

    def _deactivate(self, e: Edge) -> Optional[UpdateReport]:
        i = self.home[e]
        rep = None
        if i is not None:
            eng = self.engines[i]
            rep = eng.delete(*e)
            if eng.graph.m == 0:
                del self.engines[i]
        self.home[e] = None
        return rep

    # ---- updates ---------------------------------------------------------

    def insert(self, u: int, v: int, w) -> Optional[UpdateReport]:
        """Add a weighted edge; returns the class engine's report, ``None`` if parked."""
        we = WeightedEdge(edge(u, v), as_fraction(w))
        e = self.graph.insert_edge(u, v)
        self.weight[e] = we.weight
        self._weights[we.weight] += 1
        self.home[e] = None
        if we.weight >= self.cutoff():
            return self._activate(e)
        return None

    def delete(self, u: int, v: int) -> Optional[UpdateReport]:
        e = self.graph.delete_edge(u, v)
        rep = self._deactivate(e)
        w = self.weight.pop(e)
        del self.home[e]
        self._weights[w] -= 1
        if not self._weights[w]:
            del self._weights[w]
        return rep

    def rebalance(self) -> int:
        """Re-park or re-activate edges against the current cutoff; returns moves."""
        cut = self.cutoff()
        moves = 0
        for e in sorted(self.weight):
            active = self.home[e] is not None
            want = self.weight[e] >= cut
            if active and not want:
                self._deactivate(e)
                moves += 1
            elif want and not active:
                self._activate(e)
                moves += 1
        self._threshold_max = self.max_weight()
        return moves

    # ---- queries ---------------------------------------------------------

    def parked(self) -> Set[Edge]:
        return {e for e, i in self.home.items() if i is None}

    def class_matchings(self) -> Dict[int, Matching]:
        return {i: eng.current_matching() for i, eng in self.engines.items()}

    def matching(self) -> Matching:
        if self._threshold_max != self.max_weight():
            self.rebalance()
        return greedy_merge(self.class_matchings())

    def matching_weight(self) -> Fraction:
        return sum((self.weight[e] for e in self.matching().edges), Fraction(0))


def mwm_insert(eng: MWMEngine, we: WeightedEdge) -> None:
    eng.insert(*we.edge, we.weight)


def mwm_delete(eng: MWMEngine, we: WeightedEdge) -> None:
    eng.delete(*we.edge)
