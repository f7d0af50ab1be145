"""
Memory bank selection
=====================

A program accesses banked memory three times: once in each branch of a
diamond and once afterwards.  Every access needs its bank active, and
activating a bank costs one selection instruction on the edge where it
happens.  Placing a selection before each access costs 3; hoisting a
single selection above the diamond costs 2 on this graph (one per
branch edge, since the value must be known on both).
"""

from splcsp import (
    BankSpec,
    build_bank_selection,
    decode_banks,
    decompose,
    evaluate,
    oracle_solve,
    parse_program,
    solve,
)

SOURCE = """\
if phi then
  a1;
  skip
else
  a2;
  skip
fi;
a3
"""

decomp = decompose(parse_program(SOURCE))
cfg = decomp.cfg

# the vertices reached by the three access statements must have bank 0
access = {e.dst for e in cfg.edges if e.text in ("a1", "a2", "a3")}
print("access vertices:", sorted(access))

spec = BankSpec(banks=1, preassigned={v: 0 for v in access})
instance = build_bank_selection(cfg, spec)

best = solve(instance, decomp)
print("optimal selection cost:", best.min_cost)
print("banks:", decode_banks(spec, best.assignment))
assert oracle_solve(instance).min_cost == best.min_cost

# the ad-hoc policy: keep the bank unknown everywhere else, pay one
# selection right before every access
adhoc = {v: (0 if v in access else spec.unknown) for v in range(cfg.vertex_count)}
print("per-access insertion cost:", evaluate(instance, adhoc))
