"""matchband: simulation library and benchmark harness for rank-1 matching bandits."""

from .core import (
    Bernoulli,
    Gaussian,
    GapSummary,
    Matching,
    Rank1Instance,
    compute_gaps,
    enumerate_perfect_matchings,
    expected_reward,
    optimal_matching,
    round_robin_schedule,
)
from .env import Feedback, MatchingEnv, PairEnv, RegretLedger, SeededRng, sample_feedback

__version__ = "0.1.0"

__all__ = [
    "Bernoulli",
    "Gaussian",
    "GapSummary",
    "Matching",
    "Rank1Instance",
    "compute_gaps",
    "enumerate_perfect_matchings",
    "expected_reward",
    "optimal_matching",
    "round_robin_schedule",
    "Feedback",
    "MatchingEnv",
    "PairEnv",
    "RegretLedger",
    "SeededRng",
    "sample_feedback",
]
