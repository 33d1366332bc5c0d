import csv
import io
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynmatch.bench.cli import main
from dynmatch.bench.harness import (
    CSV_COLUMNS,
    RunConfig,
    fit_through_origin,
    records_to_csv,
    run_stream,
    summarize,
)
from dynmatch.bench.streams import (
    KINDS,
    format_stream,
    generate_stream,
    parse_stream,
)
from dynmatch.errors import ParseError, PreconditionError, UnknownKind
from dynmatch.mwm import class_of


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_empty_stream_gives_header_only_csv_and_zero_summary():
    res = run_stream(parse_stream("# n=5\n"))
    assert records_to_csv(res.records) == ",".join(CSV_COLUMNS) + "\n"
    s = res.summary
    assert s["updates"] == 0 and s["queries"] == 0
    assert s["max_C"] == 0 and s["mean_C"] == 0.0 and s["worst_ratio"] == 0.0


def test_three_op_stream():
    res = run_stream(parse_stream("# n=4\n+ 0 1\n?\n- 0 1\n"))
    rows = _rows(records_to_csv(res.records))
    assert [r["op"] for r in rows] == ["+", "?", "-"]
    assert rows[1]["matching_size"] == "1"
    assert rows[1]["oracle"] == "exact" and rows[1]["ratio"] == "1.000000"
    assert rows[0]["ratio"] == "" and rows[2]["ratio"] == ""
    assert rows[2]["matching_size"] == "0"


def test_parse_errors_carry_line_numbers():
    with pytest.raises(ParseError) as exc:
        parse_stream("# n=4\n+ 0 1\n* 1 2\n")
    assert exc.value.line == 3
    with pytest.raises(ParseError) as exc:
        parse_stream("# n=4\n+ 0 x\n")
    assert exc.value.line == 2
    with pytest.raises(ParseError):
        parse_stream("+ 0 1\n")
    with pytest.raises(ParseError) as exc:
        parse_stream("# n=4\n# weighted=1\n+ 0 1\n")
    assert exc.value.line == 3


def test_precondition_error_carries_line_number():
    s = parse_stream("# n=4\n+ 0 1\n?\n+ 1 0\n")
    with pytest.raises(PreconditionError) as exc:
        run_stream(s)
    assert exc.value.line == 4
    with pytest.raises(PreconditionError) as exc:
        run_stream(parse_stream("# n=4\n- 0 1\n"))
    assert exc.value.line == 2
    with pytest.raises(PreconditionError):
        run_stream(parse_stream("# n=4\n+ 0 9\n"))


def test_unknown_kind():
    with pytest.raises(UnknownKind):
        generate_stream("nope", 10, 10, 0)


@pytest.mark.parametrize("kind", KINDS)
def test_generator_deterministic_and_round_trips(kind):
    a = format_stream(generate_stream(kind, 30, 300, seed=5))
    b = format_stream(generate_stream(kind, 30, 300, seed=5))
    c = format_stream(generate_stream(kind, 30, 300, seed=6))
    assert a == b
    assert a != c
    assert format_stream(parse_stream(a)) == a
    s = parse_stream(a)
    assert s.updates() == 300


@pytest.mark.parametrize("kind", KINDS)
def test_generated_streams_are_legal(kind):
    s = generate_stream(kind, 20, 400, seed=1)
    live = set()
    for op in s.ops:
        if op.kind == "+":
            e = (min(op.u, op.v), max(op.u, op.v))
            assert op.u != op.v and e not in live
            live.add(e)
        elif op.kind == "-":
            live.remove((min(op.u, op.v), max(op.u, op.v)))


def test_sliding_window_deletes_oldest():
    s = generate_stream("sliding-window", 64, 1000, seed=3, window=100)
    order = []
    deletes = 0
    for op in s.ops:
        if op.kind == "+":
            order.append((op.u, op.v))
            assert len(order) <= 100
        elif op.kind == "-":
            assert (op.u, op.v) == order.pop(0)
            deletes += 1
    assert deletes > 0


def test_bipartite_random_respects_sides():
    s = generate_stream("bipartite-random", 40, 500, seed=2)
    for op in s.ops:
        if op.kind == "+":
            assert (op.u < 20) != (op.v < 20)


def test_adversarial_star_fills_and_empties_center():
    n = 16
    s = generate_stream("adversarial-star", n, 400, seed=4, query_every=0)
    deg = [0] * n
    peak = [0] * n
    emptied = [False] * n
    for op in s.ops:
        step = 1 if op.kind == "+" else -1
        for x in (op.u, op.v):
            deg[x] += step
            peak[x] = max(peak[x], deg[x])
            if deg[x] == 0 and peak[x] >= n - 1:
                emptied[x] = True
    assert any(emptied)
    res = run_stream(s, RunConfig(oracle="off"))
    assert res.summary["max_C"] > 1


def test_weighted_geometric_spans_three_classes():
    s = generate_stream("weighted-geometric", 20, 300, seed=9, epsilon=Fraction(1, 2))
    classes = {class_of(op.weight, Fraction(1, 2)).i for op in s.ops if op.kind == "+"}
    assert len(classes) >= 3
    assert s.weighted


def test_weighted_run_reports_weights_and_ratio():
    s = generate_stream("weighted-geometric", 8, 40, seed=1, query_every=5)
    res = run_stream(s, RunConfig(validate=True))
    assert not res.failures
    q = [r for r in res.records if r.op == "?" and r.ratio is not None]
    assert q
    for r in q:
        assert r.matching_weight > 0 or r.oracle_mu == 0
        assert r.ratio >= 1.0 - 1e-9


def test_summary_recomputable_from_csv():
    s = generate_stream("erdos-renyi-dynamic", 16, 300, seed=8)
    res = run_stream(s)
    rows = _rows(records_to_csv(res.records))
    ups = [r for r in rows if r["op"] != "?"]
    Cs = [int(r["C"]) for r in ups]
    assert res.summary["max_C"] == max(Cs)
    assert math.isclose(res.summary["mean_C"], sum(Cs) / len(Cs))
    assert res.summary["rebuilds"] == sum(int(r["rebuilt"]) for r in ups)
    ratios = [float(r["ratio"]) for r in rows if r["ratio"]]
    assert math.isclose(res.summary["worst_ratio"], max(ratios), abs_tol=1e-6)
    work = [int(r["partition_work"]) + int(r["matcher_work"]) for r in ups]
    assert res.summary["max_work"] == max(work)
    beta = 6.0
    assert math.isclose(res.summary["c1_fit"], (sum(Cs) / len(Cs)) / (beta**2 * math.log(16)))


def test_ratio_only_on_oracle_rows():
    s = generate_stream("erdos-renyi-dynamic", 12, 100, seed=0)
    for r in run_stream(s).records:
        assert r.C >= 0
        assert (r.ratio is None) == (r.oracle_mu is None)
        if r.op != "?":
            assert r.ratio is None


def test_oracle_off_skips_ratio():
    s = generate_stream("erdos-renyi-dynamic", 12, 100, seed=0)
    res = run_stream(s, RunConfig(oracle="off"))
    assert res.summary["oracle_queries"] == 0


def test_fit_through_origin():
    assert fit_through_origin([1, 2, 3], [2, 4, 6]) == pytest.approx(2.0)
    assert fit_through_origin([], []) == 0.0


def test_summarize_timing_keys():
    assert "mean_wall_ns" in summarize([], 10, Fraction(1, 2), timing=True)


@settings(max_examples=15)
@given(st.sampled_from(KINDS), st.integers(0, 10**6))
def test_verify_mode_clean_on_small_streams(kind, seed):
    s = generate_stream(kind, 10, 120, seed=seed)
    res = run_stream(s, RunConfig(validate=True))
    assert res.failures == []


# ---- CLI --------------------------------------------------------------------


def test_cli_gen_run_verify(tmp_path, capsys):
    path = tmp_path / "s.stream"
    assert main(["gen", "bipartite-random", "--n", "20", "--steps", "200", "--seed", "1", "-o", str(path)]) == 0
    out_csv = tmp_path / "m.csv"
    assert main(["run", str(path), "--csv", str(out_csv), "--oracle", "bipartite"]) == 0
    out = capsys.readouterr().out
    assert "worst_ratio=" in out and "updates=200" in out
    rows = _rows(out_csv.read_text())
    assert len(rows) == 220
    assert all(r["wall_ns"] == "0" for r in rows)
    assert main(["verify", str(path), "--d-override", "2"]) == 0
    assert "validation_failures=0" in capsys.readouterr().out


def test_cli_timing_records_wall_clock(tmp_path):
    path = tmp_path / "s.stream"
    main(["gen", "erdos-renyi-dynamic", "--n", "10", "--steps", "50", "-o", str(path)])
    out_csv = tmp_path / "m.csv"
    assert main(["run", str(path), "--timing", "--csv", str(out_csv)]) == 0
    rows = [r for r in _rows(out_csv.read_text()) if r["op"] != "?"]
    assert any(int(r["wall_ns"]) > 0 for r in rows)


def test_cli_gen_stdout(capsys):
    assert main(["gen", "sliding-window", "--n", "8", "--steps", "5"]) == 0
    assert capsys.readouterr().out.startswith("# n=8\n")


def test_cli_errors(tmp_path, capsys):
    bad = tmp_path / "bad.stream"
    bad.write_text("# n=4\n+ 0 1\n+ 0 1\n")
    assert main(["run", str(bad)]) == 2
    assert "line 3" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.stream")]) == 2
    with pytest.raises(SystemExit):
        main(["gen", "nope", "--n", "4", "--steps", "1"])
    with pytest.raises(SystemExit):
        main(["run", str(bad), "--epsilon", "2"])
    with pytest.raises(SystemExit):
        main(["run", str(bad), "--d-override", "0"])
