"""
From program text to a control-flow graph
=========================================

Parse a structured program, pretty-print it back, check that every
break/continue sits inside a loop, and build the CFG together with the
series/parallel/loop operation tree that constructed it.
"""

from splcsp import check_closed, decompose, parse_program, pretty_print

SOURCE = """\
while x >= 1 do
  if x >= y then
    x := x - y;
    break
  else
    y := y - x;
    continue
  fi
od
"""

tree = parse_program(SOURCE)
print("canonical form:")
print(pretty_print(tree))

report = check_closed(tree)
print("closed:", report.is_closed)

# the decomposition carries the CFG and one node per grammar production
decomp = decompose(tree)
cfg = decomp.cfg
print("vertices:", cfg.vertex_count, " edges:", len(cfg.edges))
print("entry:", cfg.entry, " exit:", cfg.exit)

print("\nedges (src -> dst, label, statement):")
for e in cfg.edges:
    text = f" {e.text!r}" if e.text else ""
    taken = "  [taken]" if e.taken else ""
    print(f"  {e.src} -> {e.dst}  {e.label}{text}{taken}")

print("\noperation tree, bottom-up:")
for i, node in enumerate(decomp.nodes):
    children = f" children={list(node.children)}" if node.children else ""
    print(f"  node {i}: {node.kind}{children} specials={node.specials}")

# Graphviz input for the CFG, if you want a picture
print("\nDOT output:")
print(cfg.to_dot())
