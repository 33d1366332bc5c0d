"""Command-line entry point: ``dynmatch {run,verify,gen}``."""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Union

from ..errors import StreamError, UnknownKind
from .harness import ORACLE_MODES, RunConfig, format_summary, records_to_csv, run_stream
from .streams import KINDS, format_stream, generate_stream, read_stream


def _d_arg(text: str) -> Union[int, str]:
    if text == "auto":
        return "auto"
    try:
        d = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected a positive integer or 'auto'") from None
    if d < 1:
        raise argparse.ArgumentTypeError("d must be positive")
    return d


def _eps_arg(text: str) -> Fraction:
    try:
        eps = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"bad epsilon {text!r}") from None
    if not (0 < eps <= Fraction(1, 2)):
        raise argparse.ArgumentTypeError("epsilon must lie in (0, 1/2]")
    return eps


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="dynmatch",
        description="Replay dynamic-graph update streams through the matching engine.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def run_args(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("stream", type=Path, help="stream file")
        sp.add_argument("--epsilon", type=_eps_arg, help="override the stream's epsilon")
        sp.add_argument("--seed", type=int, help="override the stream's seed")
        sp.add_argument(
            "--d-override",
            type=_d_arg,
            default=None,
            help="sampling parameter d, 'auto' for the derived value (default: stream header)",
        )
        sp.add_argument("--oracle", choices=ORACLE_MODES, default="auto")
        sp.add_argument("--csv", type=Path, help="write per-op metrics here")
        sp.add_argument("--timing", action="store_true", help="record wall-clock ns per update")

    run = sub.add_parser("run", help="replay a stream and report metrics")
    run_args(run)
    ver = sub.add_parser("verify", help="replay with every validator after each update")
    run_args(ver)

    gen = sub.add_parser("gen", help="generate a deterministic stream")
    gen.add_argument("kind", choices=KINDS)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--steps", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--epsilon", type=_eps_arg, default=Fraction(1, 2))
    gen.add_argument("--window", type=int, default=100)
    gen.add_argument("--query-every", type=int, default=10)
    gen.add_argument("--avg-degree", type=float, default=6.0)
    gen.add_argument("--d-override", type=_d_arg, default=None)
    gen.add_argument("-o", "--output", type=Path, help="output file (default: stdout)")
    return p


def _run(args, validate: bool) -> int:
    stream = read_stream(args.stream)
    cfg = RunConfig(
        epsilon=args.epsilon,
        seed=args.seed,
        oracle=args.oracle,
        validate=validate,
        timing=args.timing,
    )
    if args.d_override is not None:
        cfg.d_override = None if args.d_override == "auto" else args.d_override
        cfg.use_stream_d = False
    result = run_stream(stream, cfg)
    if args.csv:
        args.csv.write_text(records_to_csv(result.records))
    sys.stdout.write(format_summary(result.summary))
    for msg in result.failures[:20]:
        print(f"FAIL {msg}", file=sys.stderr)
    return 1 if result.failures else 0


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "gen":
            s = generate_stream(
                args.kind,
                args.n,
                args.steps,
                args.seed,
                epsilon=args.epsilon,
                window=args.window,
                query_every=args.query_every,
                avg_degree=args.avg_degree,
                d_override=None if args.d_override == "auto" else args.d_override,
            )
            text = format_stream(s)
            if args.output:
                args.output.write_text(text)
            else:
                sys.stdout.write(text)
            return 0
        return _run(args, validate=args.command == "verify")
    except (StreamError, UnknownKind, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
