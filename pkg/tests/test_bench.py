import io
import math

import pytest

from splcsp.bench import (
    CSV_FIELDS,
    BenchRecord,
    OracleMismatchError,
    mean_solve_ns,
    run_bench,
    write_csv,
)


def test_run_bench_shape():
    records = run_bench(sizes=[3, 5], trials=4, seed=1)
    assert len(records) == 8
    assert [(r.size, r.id) for r in records] == [
        (3, 0), (3, 1), (3, 2), (3, 3), (5, 0), (5, 1), (5, 2), (5, 3),
    ]
    for r in records:
        assert r.vertices > 0 and r.edges > 0
        assert r.domain == 2
        assert r.solve_ns > 0
        assert r.oracle_ns is None


def test_run_bench_deterministic_instances():
    a = run_bench(sizes=[4], trials=3, seed=9)
    b = run_bench(sizes=[4], trials=3, seed=9)
    assert [(r.vertices, r.edges, r.cost) for r in a] == [
        (r.vertices, r.edges, r.cost) for r in b
    ]


def test_run_bench_oracle_cross_check():
    records = run_bench(sizes=[2, 4], trials=5, seed=3, with_oracle=True)
    assert all(r.oracle_ns is not None for r in records)
    with_inf = run_bench(
        sizes=[3], trials=5, seed=3, with_oracle=True, inf_prob=0.3,
        restrict_prob=0.3,
    )
    assert len(with_inf) == 5


def test_run_bench_skips_oracle_over_budget():
    records = run_bench(
        sizes=[40], trials=1, seed=0, with_oracle=True, oracle_budget=4
    )
    assert records[0].oracle_ns is None


def test_csv_output():
    records = run_bench(sizes=[3], trials=2, seed=5)
    buf = io.StringIO()
    write_csv(records, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == ",".join(CSV_FIELDS)
    assert len(lines) == 3
    first = lines[1].split(",")
    assert first[0] == "3" and first[1] == "0"
    int(first[5])  # solve_ns parses back


def test_csv_infinite_cost_and_missing_oracle():
    r = BenchRecord(
        size=1, id=0, vertices=4, edges=1, domain=2,
        solve_ns=10, oracle_ns=None, cost=math.inf,
    )
    assert r.row()[-2:] == ["", "inf"]


def test_mean_solve_ns():
    records = [
        BenchRecord(1, 0, 4, 1, 2, 100, None, 0),
        BenchRecord(1, 1, 4, 1, 2, 300, None, 0),
        BenchRecord(2, 0, 5, 2, 2, 900, None, 0),
    ]
    assert mean_solve_ns(records, 1) == 200.0
    assert mean_solve_ns(records, 2) == 900.0
    with pytest.raises(ZeroDivisionError):
        mean_solve_ns(records, 3)


def test_oracle_mismatch_is_detectable(monkeypatch):
    from splcsp import bench as bench_mod
    from splcsp.solver import Solution

    def broken_solve(instance, decomp):
        return Solution(999_999, None)

    monkeypatch.setattr(bench_mod, "solve", broken_solve)
    with pytest.raises(OracleMismatchError):
        bench_mod.run_bench(sizes=[3], trials=1, seed=0, with_oracle=True)
