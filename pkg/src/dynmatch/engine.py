"""One graph update driven through partition, kernel and matcher, in that order."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple

from .errors import InvariantViolation
from .graph import DynamicGraph, Edge, Matching, matching_is_valid
from .matcher import EpochState
from .partition import (
    LevelState,
    PartitionParams,
    approx_maximal_violation,
    as_fraction,
    check_nice_partition,
    derive_cd,
)
from .sampler import Kernel, SamplerConfig, check_kernel

# Floor level used at desk scale.  The literature value K = 20 needs
# n >= beta**20 before a single level above the floor exists.
DESK_FLOOR_LEVEL = 1


@dataclass
class UpdateReport:
    op: str
    edge: Edge
    C: int
    kernel_added: int
    kernel_removed: int
    partition_moves: int
    partition_work: int
    matcher_work: int
    rebuilt: bool
    wall_ns: int
    matching_size: int


@dataclass
class ValidationReport:
    partition: str = ""
    approx_maximal: str = ""
    kernel: str = ""
    matching: str = ""
    unsatisfied_edges: int = 0
    problems: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.problems

    def __bool__(self) -> bool:
        return self.ok


class Engine:
    """Fully dynamic integral matching over a fixed vertex universe.

    ``d_override`` replaces the sampling parameter ``d`` (which at the
    analysed scale is astronomically large) by a small value; structural
    invariants are still enforced but :attr:`whp_void` reports that the
    high-probability claims no longer apply.
    """

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
        self.params = PartitionParams.from_epsilon(self.epsilon, n, K=floor_level)
        self.c, self.d_auto = derive_cd(self.params, n)
        self.d = self.d_auto if d_override is None else d_override
        if self.d < 1:
            raise ValueError("d must be at least 1")
        self.graph = DynamicGraph(n)
        self.partition = LevelState(n, self.params)
        self.config = SamplerConfig(d=self.d, c=self.c, epsilon=self.epsilon, seed=seed)
        self.kernel = Kernel(n, self.config)
        self.matcher = EpochState(self.epsilon, self.config.cap)
        self.steps = 0

    @property
    def whp_void(self) -> bool:
        return not self.config.satisfies_hypothesis(self.n)

    def _run(self, op: str, e: Edge, deltas, t0: int) -> UpdateReport:
        kd = self.kernel.apply_weight_deltas(deltas)
        rebuilt = False
        work = 0
        if len(kd):
            work = self.matcher.apply(kd, self.kernel.h_adj)
            rebuilt = self.matcher.last_rebuilt
        self.steps += 1
        return UpdateReport(
            op=op,
            edge=e,
            C=len(deltas),
            kernel_added=len(kd.added),
            kernel_removed=len(kd.removed),
            partition_moves=self.partition.last_moves,
            partition_work=self.partition.last_work,
            matcher_work=work,
            rebuilt=rebuilt,
            wall_ns=time.perf_counter_ns() - t0,
            matching_size=len(self.matcher.current),
        )

    def insert(self, u: int, v: int) -> UpdateReport:
        t0 = time.perf_counter_ns()
        e = self.graph.insert_edge(u, v)
        deltas = self.partition.insert(u, v)
        return self._run("+", e, deltas, t0)

    def delete(self, u: int, v: int) -> UpdateReport:
        t0 = time.perf_counter_ns()
        e = self.graph.delete_edge(u, v)
        deltas = self.partition.delete(u, v)
        return self._run("-", e, deltas, t0)

    def current_matching(self) -> Matching:
        return self.matcher.current

    def matching_size(self) -> int:
        return len(self.matcher.current)

    def kernel_graph(self) -> DynamicGraph:
        return self.kernel.snapshot()

    def validate(self) -> ValidationReport:
        """Run every structural validator; probabilistic kernel misses are only counted."""
        rep = ValidationReport()
        pr = check_nice_partition(self.partition, self.graph)
        if not pr:
            rep.partition = f"{pr.property} at {pr.witness}: {pr.detail}"
            rep.problems.append("partition")
        bad = approx_maximal_violation(self.graph, self.partition.weights(), self.c, self.d_auto)
        if bad is not None:
            rep.approx_maximal = f"edge {bad}"
            rep.problems.append("approx_maximal")
        kr = check_kernel(self.graph, self.kernel, self.c, self.d, self.epsilon)
        rep.unsatisfied_edges = len(kr.unsatisfied)
        if not kr.structurally_ok:
            rep.kernel = (
                f"cap={kr.cap_violations[:3]} foreign={kr.foreign_edges[:3]} "
                f"inconsistent={kr.inconsistent_edges[:3]}"
            )
            rep.problems.append("kernel")
        m = self.matcher.current
        in_h = all(e in self.kernel.H_edges for e in m.edges)
        if not (in_h and matching_is_valid(self.graph, m.edges)):
            rep.matching = f"matching {sorted(m.edges)[:4]} invalid"
            rep.problems.append("matching")
        return rep

    def assert_valid(self) -> None:
        rep = self.validate()
        if not rep.ok:
            raise InvariantViolation(
                "; ".join(
                    f"{p}: {getattr(rep, p)}" for p in rep.problems
                )
            )


def engine_insert(eng: Engine, e: Tuple[int, int]) -> UpdateReport:
    return eng.insert(*e)


def engine_delete(eng: Engine, e: Tuple[int, int]) -> UpdateReport:
    return eng.delete(*e)


def current_matching(eng: Engine) -> Matching:
    return eng.current_matching()
