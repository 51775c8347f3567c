"""Green's functions of birth-death chains on lines and trees.

Thin re-export of the compiled core. Four routes to the same expected
visit counts (exact solve, Brownian-embedding local times, electric
networks, Monte Carlo) plus the closed-form visit-count ratios that tie
them together.
"""

from ._core import (
    BirthDeathChain,
    ClassifyOptions,
    ConductanceNetwork,
    EmbeddingData,
    Extent,
    FormulaFamily,
    FormulaSpec,
    GreenMatrix,
    GreenResult,
    ProbabilityTriple,
    RatioCheck,
    RatioValue,
    Recurrence,
    RecurrenceVerdict,
    Route,
    SeriesStatus,
    SideSum,
    SimConfig,
    SolverError,
    SpecError,
    SplitMix64,
    TransitionRow,
    TreeChain,
    TreePath,
    VisitEstimate,
    Violation,
    VoltageSolution,
    assign_conductances,
    build_embedding,
    chain_from_json,
    classify,
    classify_formula,
    dump_network_json,
    expected_local_time,
    find_path,
    fnv1a64_hex,
    formula_from_json,
    green,
    green_matrix,
    green_tree,
    green_via_local_time,
    green_via_voltage,
    line_conductances,
    mix64,
    network_from_json,
    path_ratio,
    ratio_via_conductance,
    recover_probabilities,
    remove_laziness,
    simulate_line,
    simulate_tree,
    solve_voltages,
    symmetry_ratio,
    tree_from_json,
    trial_stream,
    verify_ratio_identity,
)

__all__ = [
    "BirthDeathChain",
    "ClassifyOptions",
    "ConductanceNetwork",
    "EmbeddingData",
    "Extent",
    "FormulaFamily",
    "FormulaSpec",
    "GreenMatrix",
    "GreenResult",
    "ProbabilityTriple",
    "RatioCheck",
    "RatioValue",
    "Recurrence",
    "RecurrenceVerdict",
    "Route",
    "SeriesStatus",
    "SideSum",
    "SimConfig",
    "SolverError",
    "SpecError",
    "SplitMix64",
    "TransitionRow",
    "TreeChain",
    "TreePath",
    "VisitEstimate",
    "Violation",
    "VoltageSolution",
    "assign_conductances",
    "build_embedding",
    "chain_from_json",
    "classify",
    "classify_formula",
    "dump_network_json",
    "expected_local_time",
    "find_path",
    "fnv1a64_hex",
    "formula_from_json",
    "green",
    "green_matrix",
    "green_tree",
    "green_via_local_time",
    "green_via_voltage",
    "line_conductances",
    "mix64",
    "network_from_json",
    "path_ratio",
    "ratio_via_conductance",
    "recover_probabilities",
    "remove_laziness",
    "simulate_line",
    "simulate_tree",
    "solve_voltages",
    "symmetry_ratio",
    "tree_from_json",
    "trial_stream",
    "verify_ratio_identity",
]

__version__ = "1.0.0"
