"""Experiment orchestration: config, seeding, parallel execution and reports."""

from .config import ExperimentConfig, load_config, parse_config
from .experiments import RunRecord, run_experiment
from .report import emit_report
from .seeding import splitmix64, stream, stream_seed

__all__ = [
    "ExperimentConfig",
    "load_config",
    "parse_config",
    "RunRecord",
    "run_experiment",
    "emit_report",
    "splitmix64",
    "stream",
    "stream_seed",
]
