"""Stream replay, metrics and the command-line harness."""

from .harness import MetricsRecord, RunConfig, RunResult, records_to_csv, run_stream, summarize
from .streams import UpdateStream, generate_stream, parse_stream, read_stream, write_stream

__all__ = [
    "MetricsRecord",
    "RunConfig",
    "RunResult",
    "UpdateStream",
    "generate_stream",
    "parse_stream",
    "read_stream",
    "records_to_csv",
    "run_stream",
    "summarize",
    "write_stream",
]
