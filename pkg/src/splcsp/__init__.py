"""Linear-time partial constraint satisfaction on the control-flow
graphs of structured goto-free programs.

Pipeline: `parse_program` text, `decompose` the tree into the
series-parallel-loop operations that build its CFG, attach costs with
`PcspInstance` (or one of the problem builders in `instances`), then
`solve`.  `oracle_solve` cross-checks by brute force.
"""

from .bench import BenchRecord, OracleMismatchError, run_bench, write_csv
from .gen import GenConfig, gen_random_program, random_instance
from .instances import (
    SPILLED,
    BadPreassignmentError,
    BankSpec,
    DisconnectedLifetimeError,
    DomainTooLargeError,
    LospreSpec,
    RegAllocSpec,
    build_bank_selection,
    build_graph_coloring,
    build_lospre,
    build_regalloc,
    count_placements,
    decode_banks,
    decode_placements,
    enumerate_placements,
    lospre_objective,
    regalloc_domain,
)
from .lang import (
    Break,
    ClosednessReport,
    Continue,
    EmptyInputError,
    Epsilon,
    If,
    ParseTree,
    ProgramSyntaxError,
    Seq,
    While,
    check_closed,
    count_nodes,
    count_statements,
    parse_program,
    pretty_print,
)
from .solver import (
    INFINITY,
    BudgetExceededError,
    InstanceMismatchError,
    PartialAssignmentError,
    PcspInstance,
    Solution,
    as_csp,
    dp_tables,
    evaluate,
    instance_from_json,
    instance_to_json,
    oracle_solve,
    solve,
)
from .spl import (
    Cfg,
    Decomposition,
    DecompNode,
    Edge,
    OpenProgramWarning,
    OverlappingGraphsError,
    SplGraph,
    atomic,
    decompose,
    loop,
    parallel,
    series,
)

__version__ = "0.1.0"

__all__ = [
    "BadPreassignmentError",
    "BankSpec",
    "BenchRecord",
    "Break",
    "BudgetExceededError",
    "Cfg",
    "ClosednessReport",
    "Continue",
    "DecompNode",
    "Decomposition",
    "DisconnectedLifetimeError",
    "DomainTooLargeError",
    "Edge",
    "EmptyInputError",
    "Epsilon",
    "GenConfig",
    "If",
    "INFINITY",
    "InstanceMismatchError",
    "LospreSpec",
    "OpenProgramWarning",
    "OracleMismatchError",
    "OverlappingGraphsError",
    "ParseTree",
    "PartialAssignmentError",
    "PcspInstance",
    "ProgramSyntaxError",
    "RegAllocSpec",
    "SPILLED",
    "Seq",
    "Solution",
    "SplGraph",
    "While",
    "as_csp",
    "atomic",
    "build_bank_selection",
    "build_graph_coloring",
    "build_lospre",
    "build_regalloc",
    "check_closed",
    "count_nodes",
    "count_placements",
    "count_statements",
    "decode_banks",
    "decode_placements",
    "decompose",
    "dp_tables",
    "enumerate_placements",
    "evaluate",
    "gen_random_program",
    "instance_from_json",
    "instance_to_json",
    "loop",
    "lospre_objective",
    "oracle_solve",
    "parallel",
    "parse_program",
    "pretty_print",
    "random_instance",
    "regalloc_domain",
    "run_bench",
    "series",
    "solve",
    "write_csv",
]
