"""Decomposition heuristic: k-shortest routes, exact RTMA, spectrum assignment."""

from .heuristic import (
    RESULT_COLUMNS,
    SUMMARY_COLUMNS,
    DecAlg,
    DecAlgConfig,
    HeuristicResult,
    RefA,
    build_pairs,
    dec_alg,
    ref_a,
    results_csv,
)
from .ksp import path_length, yen_ksp
from .rtma import (
    GRow,
    RoutePair,
    RtmaSolution,
    excluding_constraint,
    lock_constraints,
    pair_margin,
    precalc_pairs,
    rtma_objective,
    solve_rtma,
)
from .sa import POLICIES, SaState, arrange, envelope_log_term, round_offsets, spectrum_assign

__all__ = [
    "RESULT_COLUMNS",
    "SUMMARY_COLUMNS",
    "DecAlg",
    "DecAlgConfig",
    "HeuristicResult",
    "RefA",
    "build_pairs",
    "dec_alg",
    "ref_a",
    "results_csv",
    "path_length",
    "yen_ksp",
    "GRow",
    "RoutePair",
    "RtmaSolution",
    "excluding_constraint",
    "lock_constraints",
    "pair_margin",
    "precalc_pairs",
    "rtma_objective",
    "solve_rtma",
    "POLICIES",
    "SaState",
    "arrange",
    "envelope_log_term",
    "round_offsets",
    "spectrum_assign",
]
