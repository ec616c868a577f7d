"""Intrinsically motivated goal selection on multi-goal sphere worlds.

Three goal selectors (state-blind bandit, contextual bandit, Q-learning over
goal sequences) drive per-goal skill learners via a learning-progress reward.
"""

from .config import ExperimentConfig, load_config, preset
from .env import ConfigError, WorldConfig
from .experiment import RunResult, replicate, run_experiment

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "RunResult",
    "WorldConfig",
    "load_config",
    "preset",
    "replicate",
    "run_experiment",
]
