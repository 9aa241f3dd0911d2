"""Active learning of Mealy machines with adaptive distinguishing trees."""

from .ads import compute_ads, defensive_ads
from .adt import Adt, FinalNode, ResetNode, SymbolNode
from .equiv import ExactOracle, ExpandedOracle, RandomWordOracle, WpOracle
from .harness import BenchmarkConfig, RunStats, run_benchmark, run_learning
from .learner import ADTLearner, LearnerConfig
from .mealy import (Alphabet, MealyMachine, minimize, parse_dot, random_mealy, separating_word,
                    to_dot, with_self_loops)
from .oracle import CachingOracle, SimulatedSUL

__version__ = "0.1.0"

__all__ = [
    "ADTLearner", "Adt", "Alphabet", "BenchmarkConfig", "CachingOracle", "ExactOracle",
    "ExpandedOracle", "FinalNode", "LearnerConfig", "MealyMachine", "RandomWordOracle",
    "ResetNode", "RunStats", "SimulatedSUL", "SymbolNode", "WpOracle", "compute_ads",
    "defensive_ads", "minimize", "parse_dot", "random_mealy", "run_benchmark", "run_learning",
    "separating_word", "to_dot", "with_self_loops",
]
