"""Seeded simulation of users co-evolving with an item-based CF recommender."""

from .dynamics import Simulation, Targets, WorldConfig, make_rng, run, step
from .metrics import MetricsReport, accumulate_omega, auc_est, auc_for_item, auc_real
from .movielens import RatingsTable, init_replay, parse_ratings
from .recommender import RecommenderConfig, recommend, score, score_vector, similarity
from .world import (
    INITIAL,
    RECOMMENDATION,
    SELECTION,
    BipartiteState,
    TasteMap,
    new_synthetic,
    verify_against_oracle,
)

__version__ = "0.1.0"
