"""Dynamic optimization laboratory: benchmarks, EDOAs and error indicators."""

from .benchmarks import EnvironmentSequence, generate_sequence, gmpb_fitness, mpb_fitness
from .core import ConfigError, ProblemSpec, RandomStreams
from .edoas import ALGORITHMS, EdoaConfig, register_algorithm
from .evaluation import BlackBox, BudgetExhausted, EvaluationLedger, peek_fitness
from .indicators import e_bbc, offline_error, summarize
from .runner import ExperimentConfig, run_experiment, write_outputs

__all__ = [
    "ALGORITHMS", "BlackBox", "BudgetExhausted", "ConfigError", "EdoaConfig",
    "EnvironmentSequence", "EvaluationLedger", "ExperimentConfig", "ProblemSpec",
    "RandomStreams", "e_bbc", "generate_sequence", "gmpb_fitness", "mpb_fitness",
    "offline_error", "peek_fitness", "register_algorithm", "run_experiment",
    "summarize", "write_outputs",
]
