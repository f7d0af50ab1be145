"""
Solving a constraint problem over a CFG
=======================================

Attach per-edge cost tables, per-vertex costs and allowed sets to a
control-flow graph, then minimize.  `solve` runs the linear-time
dynamic program over the decomposition; `oracle_solve` brute-forces
the same instance as a cross-check.
"""

import numpy as np

from splcsp import (
    INFINITY,
    PcspInstance,
    as_csp,
    decompose,
    evaluate,
    oracle_solve,
    parse_program,
    solve,
)

decomp = decompose(parse_program("init; while p do step od; done"))
cfg = decomp.cfg
print("vertices:", cfg.vertex_count, " edges:", len(cfg.edges))

# domain {0, 1}; edges prefer agreement, one edge forbids (1, 1)
disagree = np.array([[0.0, 3.0], [3.0, 0.0]])
first_edge = (cfg.edges[0].src, cfg.edges[0].dst)
special = np.array([[0.0, 1.0], [1.0, INFINITY]])
edge_costs = {(e.src, e.dst): disagree for e in cfg.edges}
edge_costs[first_edge] = special

instance = PcspInstance(
    cfg,
    domain_size=2,
    edge_costs=edge_costs,
    vertex_costs=lambda v, a: a,      # value 1 costs 1 everywhere
    allowed={cfg.entry: [1]},         # pin the entry
)

solution = solve(instance, decomp)
print("minimum cost:", solution.min_cost)
print("assignment:", dict(sorted(solution.assignment.items())))

# the witness really has that cost, and brute force agrees
assert evaluate(instance, solution.assignment) == solution.min_cost
assert oracle_solve(instance).min_cost == solution.min_cost
print("oracle agrees")

# hard-constraint view: positive costs become INFINITY, so the minimum
# is 0 exactly when everything can be satisfied at once
hard = as_csp(instance)
print("satisfiable as pure CSP:", solve(hard, decomp).min_cost == 0)
