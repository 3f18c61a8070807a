from .config import ExperimentConfig, load_config
from .runner import TrialRecord, run_experiment
from .summaries import summarize_cdf, summarize_power_sweep

__all__ = [
    "ExperimentConfig",
    "TrialRecord",
    "load_config",
    "run_experiment",
    "summarize_cdf",
    "summarize_power_sweep",
]
