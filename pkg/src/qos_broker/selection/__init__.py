"""Selection engine - utility, acceptance threshold, ranking, sensitivity sweep."""

from qos_broker.selection.ranking import RankingEntry, RankingResult, rank_offerings
from qos_broker.selection.sweep import SweepTable, beta_grid, sensitivity_sweep, sweep_to_csv
from qos_broker.selection.utility import (
    CONSUMER_SUBJECT,
    UtilityScore,
    acceptance_threshold,
    aggregate_utility,
    attribute_utility,
    display_utility,
    is_acceptable,
)

__all__ = [
    "CONSUMER_SUBJECT",
    "UtilityScore",
    "acceptance_threshold",
    "aggregate_utility",
    "attribute_utility",
    "display_utility",
    "is_acceptable",
    "RankingEntry",
    "RankingResult",
    "rank_offerings",
    "SweepTable",
    "beta_grid",
    "sensitivity_sweep",
    "sweep_to_csv",
]
