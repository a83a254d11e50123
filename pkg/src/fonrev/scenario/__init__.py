"""Experiment driver: demand generation, sweeps, CSV output and the CLI."""

from .demands import ZIPF_RANKS, gen_demands, rate_set, rate_set_for_average, zipf_mass
from .presets import MULTI_FEC, SINGLE_FEC, example_catalog, example_config, example_demands, six_node_network
from .runner import (
    ALGORITHMS,
    CSV_COLUMNS,
    RunRecord,
    ScenarioConfig,
    emit_csv,
    load_network,
    run_scenario,
    summarize,
)

__all__ = [
    "ZIPF_RANKS",
    "gen_demands",
    "rate_set",
    "rate_set_for_average",
    "zipf_mass",
    "MULTI_FEC",
    "SINGLE_FEC",
    "example_catalog",
    "example_config",
    "example_demands",
    "six_node_network",
    "ALGORITHMS",
    "CSV_COLUMNS",
    "RunRecord",
    "ScenarioConfig",
    "emit_csv",
    "load_network",
    "run_scenario",
    "summarize",
]
