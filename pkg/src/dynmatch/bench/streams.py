"""Update-stream text format and deterministic stream generators.

A stream is a text file, one item per line::

    # n=200
    # weighted=0
    # epsilon=1/2
    # seed=7
    + 0 101
    + 0 102 3/2      (weight only in weighted streams)
    - 0 101
    ?

Header lines (``# key=value``) may appear anywhere before the first op;
other ``#`` lines and blank lines are ignored.  Weights are written as
exact decimals or ``p/q`` rationals.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterator, List, Optional, TextIO, Tuple, Union

from ..errors import ParseError, UnknownKind
from ..graph import Edge, edge

KINDS = (
    "erdos-renyi-dynamic",
    "sliding-window",
    "bipartite-random",
    "adversarial-star",
    "weighted-geometric",
)


@dataclass(frozen=True)
class Op:
    kind: str  # '+', '-' or '?'
    u: int = -1
    v: int = -1
    weight: Optional[Fraction] = None
    line: int = 0


@dataclass
class UpdateStream:
    n: int
    weighted: bool = False
    epsilon: Fraction = Fraction(1, 2)
    seed: int = 0
    d_override: Optional[int] = None
    ops: List[Op] = field(default_factory=list)
    extra: Dict[str, str] = field(default_factory=dict)

    def updates(self) -> int:
        return sum(1 for op in self.ops if op.kind != "?")


def _parse_rational(text: str, line: int) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ParseError(line, f"bad number {text!r}") from None


def parse_stream(source: Union[str, TextIO]) -> UpdateStream:
    """Parse stream text (or an open file) into an :class:`UpdateStream`."""
    text = source if isinstance(source, str) else source.read()
    header: Dict[str, str] = {}
    ops: List[Op] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body and not ops:
                key, _, value = body.partition("=")
                header[key.strip()] = value.strip()
            continue
        parts = line.split()
        kind = parts[0]
        if kind == "?":
            if len(parts) != 1:
                raise ParseError(lineno, "query takes no arguments")
            ops.append(Op("?", line=lineno))
            continue
        if kind not in ("+", "-"):
            raise ParseError(lineno, f"unknown op {kind!r}")
        want = (3, 4) if kind == "+" else (3,)
        if len(parts) not in want:
            raise ParseError(lineno, f"wrong field count for {kind!r}")
        try:
            u, v = int(parts[1]), int(parts[2])
        except ValueError:
            raise ParseError(lineno, "vertex ids must be integers") from None
        w = _parse_rational(parts[3], lineno) if len(parts) == 4 else None
        ops.append(Op(kind, u, v, w, lineno))

    if "n" not in header:
        raise ParseError(1, "missing header n=")
    try:
        n = int(header.pop("n"))
        weighted = header.pop("weighted", "0").lower() in ("1", "true", "yes")
        eps = Fraction(header.pop("epsilon", "1/2"))
        seed = int(header.pop("seed", "0"))
        d_raw = header.pop("d_override", "auto")
        d_override = None if d_raw in ("", "auto", "none") else int(d_raw)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(1, f"bad header value: {exc}") from None
    for op in ops:
        if op.kind == "+" and (op.weight is None) == weighted:
            need = "needs" if weighted else "must not have"
            raise ParseError(op.line, f"insert {need} a weight")
    return UpdateStream(n, weighted, eps, seed, d_override, ops, header)


def read_stream(path: Union[str, Path]) -> UpdateStream:
    return parse_stream(Path(path).read_text())


def _fmt_weight(w: Fraction) -> str:
    return str(w.numerator) if w.denominator == 1 else f"{w.numerator}/{w.denominator}"


def format_stream(s: UpdateStream) -> str:
    lines = [f"# n={s.n}", f"# weighted={int(s.weighted)}", f"# epsilon={s.epsilon}", f"# seed={s.seed}"]
    if s.d_override is not None:
        lines.append(f"# d_override={s.d_override}")
    for key in sorted(s.extra):
        lines.append(f"# {key}={s.extra[key]}")
    for op in s.ops:
        if op.kind == "?":
            lines.append("?")
        elif op.kind == "+" and op.weight is not None:
            lines.append(f"+ {op.u} {op.v} {_fmt_weight(op.weight)}")
        else:
            lines.append(f"{op.kind} {op.u} {op.v}")
    return "\n".join(lines) + "\n"


def write_stream(s: UpdateStream, path: Union[str, Path]) -> None:
    Path(path).write_text(format_stream(s))


# ---- generators ----------------------------------------------------------


class _Live:
    """Live edge set supporting uniform removal and FIFO order."""

    def __init__(self):
        self.order: Dict[Edge, None] = {}
        self.items: List[Edge] = []
        self.pos: Dict[Edge, int] = {}

    def __len__(self) -> int:
        return len(self.items)

    def __contains__(self, e: Edge) -> bool:
        return e in self.pos

    def add(self, e: Edge) -> None:
        self.pos[e] = len(self.items)
        self.items.append(e)
        self.order[e] = None

    def remove(self, e: Edge) -> None:
        i = self.pos.pop(e)
        last = self.items.pop()
        if last != e:
            self.items[i] = last
            self.pos[last] = i
        del self.order[e]

    def oldest(self) -> Edge:
        return next(iter(self.order))

    def pick(self, rng: random.Random) -> Edge:
        return self.items[rng.randrange(len(self.items))]


def _random_pair(rng: random.Random, n: int, live: _Live, left: Optional[int] = None) -> Optional[Edge]:
    for _ in range(64):
        if left is None:
            u, v = rng.randrange(n), rng.randrange(n)
        else:
            u, v = rng.randrange(left), rng.randrange(left, n)
        if u != v and edge(u, v) not in live:
            return edge(u, v)
    return None


def _geometric_weight(rng: random.Random, eps: Fraction, span: float) -> Fraction:
    # (1+eps)**x rounded to three decimals, x uniform on [0, span]
    x = (1 + float(eps)) ** rng.uniform(0.0, span)
    return Fraction(round(x * 1000), 1000)


def generate_stream(
    kind: str,
    n: int,
    steps: int,
    seed: int = 0,
    *,
    epsilon=Fraction(1, 2),
    window: int = 100,
    query_every: int = 10,
    avg_degree: float = 6.0,
    delete_prob: float = 0.4,
    star_leaves: Optional[int] = None,
    span_classes: float = 6.0,
    d_override: Optional[int] = None,
) -> UpdateStream:
    """Deterministic stream of ``steps`` updates, with a query after every ``query_every``.

    ``avg_degree`` caps the live edge count at ``avg_degree * n / 2`` for the
    random kinds; ``window`` is the live-edge budget of ``sliding-window``.
    """
    if kind not in KINDS:
        raise UnknownKind(f"unknown stream kind {kind!r}; choose from {', '.join(KINDS)}")
    if n < 2:
        raise ValueError("need at least two vertices")
    rng = random.Random(f"{kind}:{n}:{steps}:{seed}")
    eps = Fraction(epsilon)
    live = _Live()
    ops: List[Op] = []
    max_live = max(1, int(avg_degree * n / 2))
    weighted = kind == "weighted-geometric"
    left = n // 2 if kind == "bipartite-random" else None

    def ins(e: Edge, w: Optional[Fraction] = None) -> None:
        live.add(e)
        ops.append(Op("+", e[0], e[1], w))

    def dele(e: Edge) -> None:
        live.remove(e)
        ops.append(Op("-", e[0], e[1]))

    star = _star_schedule(rng, n, star_leaves) if kind == "adversarial-star" else None
    done = 0
    while done < steps:
        if kind == "sliding-window":
            if len(live) >= window:
                dele(live.oldest())
            else:
                e = _random_pair(rng, n, live)
                if e is None:
                    dele(live.oldest())
                else:
                    ins(e)
        elif star is not None:
            action, e = next(star)
            if action == "+":
                if e in live:
                    continue
                ins(e)
            else:
                if e not in live:
                    continue
                dele(e)
        else:
            delete = len(live) > 0 and (len(live) >= max_live or rng.random() < delete_prob)
            e = None if delete else _random_pair(rng, n, live, left)
            if e is None:
                if not len(live):
                    break
                dele(live.pick(rng))
            else:
                ins(e, _geometric_weight(rng, eps, span_classes) if weighted else None)
        done += 1
        if query_every and done % query_every == 0:
            ops.append(Op("?"))
    extra = {"kind": kind, "steps": str(steps)}
    return UpdateStream(n, weighted, eps, seed, d_override, ops, extra)


def _star_schedule(rng: random.Random, n: int, leaves: Optional[int]) -> Iterator[Tuple[str, Edge]]:
    """Fill a star around a rotating center, then empty it, forever.

    A sparse background of random edges among the leaves keeps the leaves'
    levels above the floor, so filling and emptying the star forces level
    repairs on both the center and its neighbors.
    """
    k = leaves if leaves is not None else max(2, n - 1)
    k = min(k, n - 1)
    background: List[Edge] = []
    center = 0
    while True:
        others = [x for x in range(n) if x != center]
        rng.shuffle(others)
        chosen = others[:k]
        for _ in range(max(1, k // 4)):
            a, b = rng.sample(chosen, 2)
            background.append(edge(a, b))
            yield "+", edge(a, b)
        for x in chosen:
            yield "+", edge(center, x)
        for x in chosen:
            yield "-", edge(center, x)
        while len(background) > 2 * n:
            yield "-", background.pop(0)
        center = (center + 1 + rng.randrange(n - 1)) % n
