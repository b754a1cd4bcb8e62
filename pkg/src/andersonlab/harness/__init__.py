"""CLI, configuration, orchestration and persistence."""

from andersonlab.harness.config import ExperimentConfig, build_config, parse_config_text
from andersonlab.harness.io import read_results, write_results
from andersonlab.harness.runner import ResultRecord, run_experiment

__all__ = [
    "ExperimentConfig",
    "ResultRecord",
    "build_config",
    "parse_config_text",
    "read_results",
    "run_experiment",
    "write_results",
]
