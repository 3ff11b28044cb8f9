"""Adaptive attacker strategy evolution against moving target platform defenses."""

__version__ = "0.1.0"

from .defense import DefenseKind, DefensePolicy
from .evolution import GaConfig, GenerationStats, evolve_run
from .experiment import ExperimentAggregate, ExperimentConfig, emit_outputs, run_experiment
from .fsm import StrategyMachine, decode, encode, export_graph
from .game import GameConfig, GameResult, play_game
from .platforms import TABLE1_SIMILARITY, Platform

__all__ = [
    "DefenseKind",
    "DefensePolicy",
    "ExperimentAggregate",
    "ExperimentConfig",
    "GaConfig",
    "GameConfig",
    "GameResult",
    "GenerationStats",
    "Platform",
    "StrategyMachine",
    "TABLE1_SIMILARITY",
    "decode",
    "emit_outputs",
    "encode",
    "evolve_run",
    "export_graph",
    "play_game",
    "run_experiment",
]
