"""
Redundancy elimination placement
================================

A value is needed at the targets of two branch edges.  Recomputing it
on every edge into a use costs 3 here; keeping it alive from the shared
predecessor (one computation, carried through the branch) costs 1.
The trade flips once lifetime costs make carrying expensive.
"""

from splcsp import (
    LospreSpec,
    build_lospre,
    decompose,
    lospre_objective,
    oracle_solve,
    parse_program,
    solve,
)

decomp = decompose(parse_program("c; if p then u1; k else u2 fi"))
cfg = decomp.cfg

use = frozenset(e.dst for e in cfg.edges if e.text in ("u1", "u2"))
print("use vertices:", sorted(use))

spec = LospreSpec(use=use)
instance = build_lospre(cfg, spec)
best = solve(instance, decomp)
members = {v for v, a in best.assignment.items() if a == 1}
print("optimal cost:", best.min_cost, " life set:", sorted(members))
assert oracle_solve(instance).min_cost == best.min_cost

# the objective straight from its definition agrees with the solver
print("formula at the optimum:", lospre_objective(cfg, spec, members))
print("formula with empty life set:", lospre_objective(cfg, spec, set()))

# charging 5 per vertex of lifetime makes carrying the value a loss
costly = LospreSpec(use=use, vertex_costs={v: 5 for v in range(cfg.vertex_count)})
best = solve(build_lospre(cfg, costly), decomp)
print("with lifetime costs:", best.min_cost,
      " life set:", sorted(v for v, a in best.assignment.items() if a == 1))
