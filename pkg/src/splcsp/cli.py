"""Command-line front end.

Exit codes: 0 success, 1 usage/parse/input errors, 2 infeasible
instance (minimum cost INFINITY), 3 solver/oracle mismatch.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import bench as bench_mod
from . import instances, lang, solver, spl
from .gen import GenConfig, gen_random_program


class _ArgumentParser(argparse.ArgumentParser):
    # usage errors are exit code 1, not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text()


def _dumps(obj: dict) -> str:
    return spl.cfg_json_dumps(obj)


def _tree_dot(tree: lang.Stmt) -> str:
    order = list(lang.walk(tree))
    ids = {id(node): i for i, node in enumerate(order)}
    lines = ["digraph parse {"]
    for node in order:
        i = ids[id(node)]
        if isinstance(node, lang.Epsilon):
            label = node.text
        elif isinstance(node, lang.If):
            label = f"if {node.guard}"
        elif isinstance(node, lang.While):
            label = f"while {node.guard}"
        elif isinstance(node, lang.Seq):
            label = ";"
        else:
            label = "break" if isinstance(node, lang.Break) else "continue"
        lines.append(f'  {i} [label="{spl._dot_escape(label)}"];')
    for node in order:
        for child in lang.children(node):
            lines.append(f"  {ids[id(node)]} -> {ids[id(child)]};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _parse_ints(text: str) -> list[int]:
    if not text.strip():
        return []
    return [int(part) for part in text.split(",")]


def _load_program(path: str) -> tuple[lang.Stmt, spl.Decomposition]:
    tree = lang.parse_program(_read_text(path))
    return tree, spl.decompose(tree)


def _emit_solution(args, payload: dict, min_cost) -> int:
    text = _dumps(payload)
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 2 if math.isinf(min_cost) else 0


def _oracle_check(args, instance, sol) -> int:
    """0 if the oracle agrees (or was not requested), 3 otherwise."""
    if not getattr(args, "oracle_check", False):
        return 0
    budget = getattr(args, "budget", None) or solver.DEFAULT_ORACLE_BUDGET
    check = solver.oracle_solve(instance, budget=budget)
    if check.min_cost != sol.min_cost:
        print(
            f"oracle mismatch: solve={sol.min_cost} oracle={check.min_cost}",
            file=sys.stderr,
        )
        return 3
    return 0


def _cmd_parse(args) -> int:
    tree = lang.parse_program(_read_text(args.file))
    report = lang.check_closed(tree)
    if not report.is_closed:
        line, col = report.violations[0]
        print(
            f"warning: program is not closed "
            f"({len(report.violations)} break/continue outside any loop, "
            f"first at {line}:{col})",
            file=sys.stderr,
        )
    if args.json:
        sys.stdout.write(_dumps(lang.tree_to_json(tree)))
    elif args.dot:
        sys.stdout.write(_tree_dot(tree))
    else:
        sys.stdout.write(lang.pretty_print(tree))
    return 0


def _cmd_cfg(args) -> int:
    _, decomp = _load_program(args.file)
    if args.dot:
        sys.stdout.write(decomp.cfg.to_dot())
    elif args.tree:
        sys.stdout.write(_dumps(decomp.to_json()))
    else:
        sys.stdout.write(_dumps(decomp.cfg.to_json()))
    return 0


def _cmd_solve(args) -> int:
    _, decomp = _load_program(args.file)
    obj = json.loads(_read_text(args.instance))
    instance = solver.instance_from_json(decomp.cfg, obj)
    sol = solver.solve(instance, decomp)
    rc = _oracle_check(args, instance, sol)
    if rc:
        return rc
    return _emit_solution(args, sol.to_json(), sol.min_cost)


def _cmd_bank(args) -> int:
    _, decomp = _load_program(args.file)
    preassigned = {}
    for item in args.preassign or []:
        v, _, b = item.partition("=")
        preassigned[int(v)] = int(b)
    taken = None
    if args.taken:
        taken = frozenset(tuple(_parse_ints(item)) for item in args.taken)
    spec = instances.BankSpec(
        banks=args.banks,
        preassigned=preassigned,
        c0=args.c0,
        c1=args.c1,
        taken_edges=taken,
        entry_unknown=not args.entry_known,
    )
    instance = instances.build_bank_selection(decomp.cfg, spec)
    sol = solver.solve(instance, decomp)
    rc = _oracle_check(args, instance, sol)
    if rc:
        return rc
    payload = sol.to_json()
    payload["banks"] = args.banks
    if sol.assignment is not None:
        payload["selected"] = {
            str(v): b for v, b in sorted(instances.decode_banks(spec, sol.assignment).items())
        }
    return _emit_solution(args, payload, sol.min_cost)


def _cmd_lospre(args) -> int:
    _, decomp = _load_program(args.file)
    edge_costs = None
    if args.edge_cost != 1:
        edge_costs = {(e.src, e.dst): args.edge_cost for e in decomp.cfg.edges}
    vertex_costs = None
    if args.vertex_cost:
        vertex_costs = {v: args.vertex_cost for v in range(decomp.cfg.vertex_count)}
    spec = instances.LospreSpec(
        use=frozenset(_parse_ints(args.use)),
        invalidating=frozenset(_parse_ints(args.invalidating)),
        edge_costs=edge_costs,
        vertex_costs=vertex_costs,
    )
    instance = instances.build_lospre(decomp.cfg, spec)
    sol = solver.solve(instance, decomp)
    rc = _oracle_check(args, instance, sol)
    if rc:
        return rc
    payload = sol.to_json()
    if sol.assignment is not None:
        payload["members"] = sorted(v for v, a in sol.assignment.items() if a == 1)
    return _emit_solution(args, payload, sol.min_cost)


def _cmd_regalloc(args) -> int:
    _, decomp = _load_program(args.file)
    lifetimes = {}
    for item in args.lifetime or []:
        var, sep, vs = item.partition("=")
        if not sep or not var:
            raise ValueError(f"expected VAR=V,V,... for --lifetime, got {item!r}")
        lifetimes[var] = frozenset(_parse_ints(vs))
    spec = instances.RegAllocSpec(
        lifetimes=lifetimes,
        registers=args.registers,
        switch_cost=args.switch_cost,
    )
    instance = instances.build_regalloc(decomp.cfg, spec)
    sol = solver.solve(instance, decomp)
    rc = _oracle_check(args, instance, sol)
    if rc:
        return rc
    payload = sol.to_json()
    if sol.assignment is not None:
        decoded = instances.decode_placements(spec, sol.assignment)
        payload["placements"] = {
            str(v): {var: loc for var, loc in sorted(p.items())}
            for v, p in sorted(decoded.items())
        }
    return _emit_solution(args, payload, sol.min_cost)


def _cmd_coloring(args) -> int:
    graph = spl.Cfg.from_json(json.loads(_read_text(args.graph)))
    instance = instances.build_graph_coloring(graph, args.colors)
    budget = args.budget or solver.DEFAULT_ORACLE_BUDGET
    sol = solver.oracle_solve(instance, budget=budget)
    payload = sol.to_json()
    payload["colors"] = args.colors
    payload["conflicts"] = payload["min_cost"]
    return _emit_solution(args, payload, sol.min_cost)


def _cmd_gen(args) -> int:
    tree = gen_random_program(GenConfig(seed=args.seed, size=args.size))
    sys.stdout.write(lang.pretty_print(tree))
    return 0


def _cmd_bench(args) -> int:
    records = bench_mod.run_bench(
        sizes=_parse_ints(args.sizes),
        domain=args.domain,
        trials=args.trials,
        seed=args.seed,
        with_oracle=args.with_oracle,
        inf_prob=args.inf_prob,
    )
    if args.csv:
        with open(args.csv, "w") as fp:
            bench_mod.write_csv(records, fp)
    else:
        bench_mod.write_csv(records, sys.stdout)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="splcsp",
        description="Constraint problems over control-flow graphs of structured programs.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    p = sub.add_parser("parse", help="parse a program and print it back")
    p.add_argument("file", help="program file, or - for stdin")
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="print the parse tree as JSON")
    fmt.add_argument("--dot", action="store_true", help="print the parse tree as DOT")
    p.set_defaults(func=_cmd_parse)

    p = sub.add_parser("cfg", help="build the control-flow graph")
    p.add_argument("file")
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--dot", action="store_true", help="CFG as DOT instead of JSON")
    fmt.add_argument("--tree", action="store_true", help="decomposition tree as JSON")
    p.set_defaults(func=_cmd_cfg)

    p = sub.add_parser("solve", help="minimize an instance over a program's CFG")
    p.add_argument("file")
    p.add_argument("--instance", required=True, help="instance JSON file")
    p.add_argument("--oracle-check", action="store_true")
    p.add_argument("--budget", type=int, default=None, help="oracle enumeration budget")
    p.add_argument("--out", help="write the solution JSON here instead of stdout")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("bank", help="memory bank selection")
    p.add_argument("file")
    p.add_argument("--banks", type=int, required=True)
    p.add_argument("--preassign", action="append", metavar="V=B")
    p.add_argument("--c0", type=int, default=1, help="selection cost off branches")
    p.add_argument("--c1", type=int, default=1, help="selection cost on taken branches")
    p.add_argument("--taken", action="append", metavar="SRC,DST", help="override taken edges")
    p.add_argument("--entry-known", action="store_true", help="do not pin the entry to unknown")
    p.add_argument("--oracle-check", action="store_true")
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_bank)

    p = sub.add_parser("lospre", help="partial redundancy elimination placement")
    p.add_argument("file")
    p.add_argument("--use", required=True, metavar="V,V,...", help="vertices using the value")
    p.add_argument("--invalidating", default="", metavar="V,V,...")
    p.add_argument("--edge-cost", type=int, default=1)
    p.add_argument("--vertex-cost", type=int, default=0)
    p.add_argument("--oracle-check", action="store_true")
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_lospre)

    p = sub.add_parser("regalloc", help="register allocation over lifetimes")
    p.add_argument("file")
    p.add_argument("--registers", type=int, required=True)
    p.add_argument("--lifetime", action="append", metavar="VAR=V,V,...", required=True)
    p.add_argument("--switch-cost", type=int, default=1)
    p.add_argument("--oracle-check", action="store_true")
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_regalloc)

    p = sub.add_parser("coloring", help="color an arbitrary digraph (exhaustive)")
    p.add_argument("graph", help="graph JSON file")
    p.add_argument("--colors", type=int, required=True)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_coloring)

    p = sub.add_parser("gen", help="generate a random program")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--size", type=int, required=True, help="statement count")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("bench", help="time the solver on random programs")
    p.add_argument("--sizes", required=True, metavar="N,N,...")
    p.add_argument("--domain", type=int, default=2)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--with-oracle", action="store_true")
    p.add_argument("--inf-prob", type=float, default=0.0)
    p.add_argument("--csv", help="write CSV here instead of stdout")
    p.set_defaults(func=_cmd_bench)

    return parser


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except lang.ProgramSyntaxError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except bench_mod.OracleMismatchError as e:
        print(f"oracle mismatch: {e}", file=sys.stderr)
        return 3
    except solver.BudgetExceededError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, TypeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
