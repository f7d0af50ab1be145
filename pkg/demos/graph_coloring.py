"""
Graph coloring as a constraint problem
======================================

Each edge wants its endpoints colored differently; every violation
costs 1.  On this four-vertex graph two colors force one conflict and
three colors suffice.  An arbitrary digraph has no decomposition, so
the exhaustive oracle does the solving here.
"""

from splcsp import Cfg, build_graph_coloring, oracle_solve

graph = Cfg.from_json(
    {"vertex_count": 4, "edges": [[0, 1], [0, 2], [1, 3], [2, 1]]}
)

for colors in (2, 3):
    solution = oracle_solve(build_graph_coloring(graph, colors))
    print(f"{colors} colors: {solution.min_cost} conflict(s),",
          "coloring:", dict(sorted(solution.assignment.items())))
