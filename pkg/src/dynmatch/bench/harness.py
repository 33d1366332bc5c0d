"""Replay update streams through an engine and collect per-op metrics.

CSV schema (one row per op, header row first)::

    step,op,u,v,C,kernel_added,kernel_removed,partition_moves,partition_work,
    matcher_work,rebuilt,wall_ns,matching_size,matching_weight,oracle,
    oracle_mu,ratio

``oracle`` is ``exact``, ``bound`` (``mu`` replaced by ``2 |greedy maximal|``)
or empty.  ``ratio`` is ``oracle_mu / matching_size`` (weights for weighted
streams), written with six decimals, and only on query rows where an
oracle ran.  ``wall_ns`` is zero unless timing is requested so that the
CSV of a replay is byte-identical.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Union

from ..engine import Engine, UpdateReport
from ..errors import DynMatchError, GraphError, PreconditionError, TooLarge
from ..graph import DynamicGraph, matching_is_valid
from ..matcher import max_augmenting_length
from ..mwm import MWMEngine, greedy_merge
from ..oracles import (
    DEFAULT_LIMITS,
    OracleLimits,
    bipartite_max_matching,
    bipartition,
    exact_mwm,
    exhaustive_max_matching,
    find_augmenting_path,
    mu_upper_bound,
)
from .streams import UpdateStream

ORACLE_MODES = ("auto", "off", "exhaustive", "bipartite")


@dataclass
class MetricsRecord:
    step: int
    op: str
    u: Optional[int] = None
    v: Optional[int] = None
    C: int = 0
    kernel_added: int = 0
    kernel_removed: int = 0
    partition_moves: int = 0
    partition_work: int = 0
    matcher_work: int = 0
    rebuilt: int = 0
    wall_ns: int = 0
    matching_size: int = 0
    matching_weight: Optional[Fraction] = None
    oracle: str = ""
    oracle_mu: Optional[Fraction] = None
    ratio: Optional[float] = None


CSV_COLUMNS = [f.name for f in fields(MetricsRecord)]


@dataclass
class RunConfig:
    epsilon: Optional[Fraction] = None
    seed: Optional[int] = None
    d_override: Optional[int] = None
    use_stream_d: bool = True
    oracle: str = "auto"
    validate: bool = False
    timing: bool = False
    limits: OracleLimits = DEFAULT_LIMITS


@dataclass
class RunResult:
    records: List[MetricsRecord]
    summary: Dict[str, Union[int, float, str]]
    failures: List[str] = field(default_factory=list)
    rebuild_checks: int = 0


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return "inf" if math.isinf(x) else f"{x:.6f}"
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{float(x):.6f}"
    if isinstance(x, bool):
        return str(int(x))
    return str(x)


def records_to_csv(records: List[MetricsRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        d = asdict(r)
        w.writerow([_fmt(d[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def _ratio(opt, got) -> float:
    if opt == 0:
        return 1.0
    if got == 0:
        return math.inf
    return float(Fraction(opt) / Fraction(got))


def _cardinality_oracle(g: DynamicGraph, mode: str, limits: OracleLimits):
    """(label, value) for ``mu(g)``, or ``("", None)`` when the mode skips it."""
    if mode == "off":
        return "", None
    side = bipartition(g)
    if mode == "bipartite":
        if side is None:
            raise DynMatchError("bipartite oracle requested on a non-bipartite graph")
        return "exact", len(bipartite_max_matching(g, side))
    if mode == "exhaustive":
        return "exact", exhaustive_max_matching(g, limits)
    if side is not None and g.n <= limits.max_n_bipartite:
        return "exact", len(bipartite_max_matching(g, side))
    if g.m <= limits.max_edges_exhaustive:
        return "exact", exhaustive_max_matching(g, limits)
    return "bound", mu_upper_bound(g)


def _weighted_oracle(eng: MWMEngine, mode: str, limits: OracleLimits):
    if mode == "off" or mode == "bipartite":
        return "", None
    if mode == "auto" and eng.graph.m > limits.max_edges_exhaustive:
        return "", None
    return "exact", exact_mwm(eng.graph, eng.weight, limits)[1]


def _engines(eng) -> List[Engine]:
    return list(eng.engines.values()) if isinstance(eng, MWMEngine) else [eng]


def fit_through_origin(xs: List[float], ys: List[float]) -> float:
    """Least-squares slope of ``y = a x``."""
    den = sum(x * x for x in xs)
    return sum(x * y for x, y in zip(xs, ys)) / den if den else 0.0


def summarize(
    records: List[MetricsRecord], n: int, epsilon: Fraction, timing: bool = False
) -> Dict[str, Union[int, float, str]]:
    """Summary statistics; every figure can be recomputed from the CSV rows."""
    beta = 3 / float(epsilon)
    ups = [r for r in records if r.op != "?"]
    queries = [r for r in records if r.op == "?"]
    ratios = [r.ratio for r in queries if r.ratio is not None]
    Cs = [r.C for r in ups]
    work = [r.partition_work + r.matcher_work for r in ups]
    ln_n = math.log(n) if n > 1 else 1.0
    mean_c = sum(Cs) / len(Cs) if Cs else 0.0
    mean_work = sum(work) / len(work) if work else 0.0
    out: Dict[str, Union[int, float, str]] = {
        "n": n,
        "epsilon": str(epsilon),
        "updates": len(ups),
        "queries": len(queries),
        "max_C": max(Cs, default=0),
        "mean_C": mean_c,
        "c1_fit": mean_c / (beta**2 * ln_n),
        "max_work": max(work, default=0),
        "mean_work": mean_work,
        "time_const": mean_work / (beta**7 * ln_n**3),
        "rebuilds": sum(r.rebuilt for r in ups),
        "worst_ratio": max(ratios, default=0.0),
        "oracle_queries": len(ratios),
    }
    if timing:
        ns = [r.wall_ns for r in ups]
        out["mean_wall_ns"] = sum(ns) / len(ns) if ns else 0.0
        out["max_wall_ns"] = max(ns, default=0)
    return out


def make_engine(stream: UpdateStream, cfg: RunConfig):
    eps = cfg.epsilon if cfg.epsilon is not None else stream.epsilon
    seed = cfg.seed if cfg.seed is not None else stream.seed
    d = cfg.d_override
    if d is None and cfg.use_stream_d:
        d = stream.d_override
    cls = MWMEngine if stream.weighted else Engine
    return cls(stream.n, eps, seed=seed, d_override=d), eps


def run_stream(
    stream: UpdateStream,
    cfg: Optional[RunConfig] = None,
    on_record: Optional[Callable[[MetricsRecord], None]] = None,
) -> RunResult:
    """Execute every op of ``stream``; validators run after each update if requested."""
    cfg = cfg or RunConfig()
    if cfg.oracle not in ORACLE_MODES:
        raise ValueError(f"oracle mode must be one of {ORACLE_MODES}")
    eng, eps = make_engine(stream, cfg)
    weighted = isinstance(eng, MWMEngine)
    records: List[MetricsRecord] = []
    failures: List[str] = []
    checks = [0]
    max_len = max_augmenting_length(eps)

    def rebuild_hook(m, adj):
        checks[0] += 1
        path = find_augmenting_path(adj, m.edges, max_len)
        if path is not None:
            failures.append(f"step {step}: augmenting path {path} after rebuild")

    if cfg.validate:
        if weighted:
            eng.on_rebuild = rebuild_hook
        else:
            eng.matcher.on_rebuild = rebuild_hook

    step = 0
    for op in stream.ops:
        step += 1
        if op.kind == "?":
            rec = MetricsRecord(step, "?")
            if weighted:
                m = eng.matching()
                got = sum((eng.weight[e] for e in m.edges), Fraction(0))
                rec.matching_size = len(m)
                rec.matching_weight = got
                label, opt = _weighted_oracle(eng, cfg.oracle, cfg.limits)
            else:
                got = eng.matching_size()
                rec.matching_size = got
                try:
                    label, opt = _cardinality_oracle(eng.graph, cfg.oracle, cfg.limits)
                except TooLarge:
                    label, opt = "", None
            if opt is not None:
                rec.oracle = label
                rec.oracle_mu = Fraction(opt)
                rec.ratio = _ratio(opt, got)
            records.append(rec)
            if on_record:
                on_record(rec)
            continue
        try:
            if op.kind == "+":
                rep = eng.insert(op.u, op.v, op.weight) if weighted else eng.insert(op.u, op.v)
            else:
                rep = eng.delete(op.u, op.v)
        except GraphError as exc:
            raise PreconditionError(op.line, str(exc)) from exc
        rec = MetricsRecord(step, op.kind, op.u, op.v)
        if isinstance(rep, UpdateReport):
            rec.C = rep.C
            rec.kernel_added = rep.kernel_added
            rec.kernel_removed = rep.kernel_removed
            rec.partition_moves = rep.partition_moves
            rec.partition_work = rep.partition_work
            rec.matcher_work = rep.matcher_work
            rec.rebuilt = int(rep.rebuilt)
            rec.wall_ns = rep.wall_ns if cfg.timing else 0
        if weighted:
            rec.matching_size = sum(len(e.current_matching()) for e in _engines(eng))
        else:
            rec.matching_size = eng.matching_size()
        if cfg.validate:
            for sub in _engines(eng):
                vr = sub.validate()
                if not vr.ok:
                    detail = "; ".join(f"{p}: {getattr(vr, p)}" for p in vr.problems)
                    failures.append(f"line {op.line}: {detail}")
            if weighted and not matching_is_valid(eng.graph, greedy_edges(eng)):
                failures.append(f"line {op.line}: merged matching invalid")
        records.append(rec)
        if on_record:
            on_record(rec)

    summary = summarize(records, stream.n, eps, cfg.timing)
    if cfg.validate:
        summary["validation_failures"] = len(failures)
        summary["rebuild_checks"] = checks[0]
    return RunResult(records, summary, failures, checks[0])


def greedy_edges(eng: MWMEngine):
    return greedy_merge(eng.class_matchings()).edges


def format_summary(summary: Dict[str, Union[int, float, str]]) -> str:
    lines = []
    for k, v in summary.items():
        lines.append(f"{k}={_fmt(v) if isinstance(v, float) else v}")
    return "\n".join(lines) + "\n"
