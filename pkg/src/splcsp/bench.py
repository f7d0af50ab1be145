"""Timing harness: random programs, random instances, solver vs oracle."""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

from .gen import GenConfig, gen_random_program, random_instance
from .solver import BudgetExceededError, oracle_solve, solve
from .spl import decompose

CSV_FIELDS = ("size", "id", "vertices", "edges", "domain", "solve_ns", "oracle_ns", "cost")


class OracleMismatchError(RuntimeError):
    """Solver and oracle disagreed on a benchmark instance."""


@dataclass(frozen=True)
class BenchRecord:
    size: int
    id: int
    vertices: int
    edges: int
    domain: int
    solve_ns: int
    oracle_ns: int | None
    cost: int | float

    def row(self) -> list[str]:
        return [
            str(self.size),
            str(self.id),
            str(self.vertices),
            str(self.edges),
            str(self.domain),
            str(self.solve_ns),
            "" if self.oracle_ns is None else str(self.oracle_ns),
            "inf" if isinstance(self.cost, float) and math.isinf(self.cost) else str(self.cost),
        ]


def run_bench(
    sizes: Sequence[int],
    domain: int = 2,
    trials: int = 20,
    seed: int = 0,
    with_oracle: bool = False,
    oracle_budget: int = 1 << 16,
    inf_prob: float = 0.0,
    restrict_prob: float = 0.0,
) -> list[BenchRecord]:
    """One record per (size, trial).  Only `solve` is inside the timed
    region; generation and decomposition are not.  With ``with_oracle``
    instances small enough for the budget are cross-checked and a
    disagreement raises `OracleMismatchError`.
    """
    records = []
    for size in sizes:
        for trial in range(trials):
            pseed = seed * 1_000_003 + size * 1009 + trial
            tree = gen_random_program(GenConfig(seed=pseed, size=size))
            decomp = decompose(tree)
            cfg = decomp.cfg
            inst = random_instance(
                cfg,
                domain,
                seed=pseed + 1,
                inf_prob=inf_prob,
                restrict_prob=restrict_prob,
            )
            t0 = time.perf_counter_ns()
            sol = solve(inst, decomp)
            solve_ns = time.perf_counter_ns() - t0
            oracle_ns = None
            if with_oracle:
                try:
                    t0 = time.perf_counter_ns()
                    check = oracle_solve(inst, budget=oracle_budget)
                    oracle_ns = time.perf_counter_ns() - t0
                except BudgetExceededError:
                    pass
                else:
                    if check.min_cost != sol.min_cost:
                        raise OracleMismatchError(
                            f"size={size} trial={trial} seed={pseed}: "
                            f"solve={sol.min_cost} oracle={check.min_cost}"
                        )
            records.append(
                BenchRecord(
                    size=size,
                    id=trial,
                    vertices=cfg.vertex_count,
                    edges=len(cfg.edges),
                    domain=domain,
                    solve_ns=solve_ns,
                    oracle_ns=oracle_ns,
                    cost=sol.min_cost,
                )
            )
    records.sort(key=lambda r: (r.size, r.id))
    return records


def write_csv(records: Iterable[BenchRecord], fp: TextIO) -> None:
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for record in records:
        writer.writerow(record.row())


def mean_solve_ns(records: Iterable[BenchRecord], size: int) -> float:
    times = [r.solve_ns for r in records if r.size == size]
    return sum(times) / len(times)
