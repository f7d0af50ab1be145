"""
Linear scaling of the solver
============================

Generate random programs of doubling sizes, time only the solve call,
and print the mean runtime per size.  Doubling the program roughly
doubles the time; the ratios hover around 2 instead of growing.
"""

import io

from splcsp import run_bench, write_csv
from splcsp.bench import mean_solve_ns

sizes = [50, 100, 200, 400, 800]
records = run_bench(sizes=sizes, domain=2, trials=5, seed=0)

print(f"{'size':>6} {'mean solve':>12}")
for size in sizes:
    print(f"{size:>6} {mean_solve_ns(records, size) / 1e6:>10.2f} ms")

print("\ndoubling ratios:")
for a, b in zip(sizes, sizes[1:]):
    ratio = mean_solve_ns(records, b) / mean_solve_ns(records, a)
    print(f"  {a:>4} -> {b:<4} {ratio:.2f}x")

buf = io.StringIO()
write_csv(records, buf)
print("\nfirst CSV lines:")
print("\n".join(buf.getvalue().splitlines()[:3]))
