"""Scenario loading, integration, metrics and output."""
from .config import ScenarioConfig, bundled_scenarios, config_from_dict, load_scenario
from .engine import SimLog, condition_reports, integrate
from .metrics import Summary, fit_decay_rate, metrics, summarize, time_to_fraction
from .output import write_csv
from .suite import run_paper_suite

__all__ = [
    "ScenarioConfig",
    "SimLog",
    "Summary",
    "bundled_scenarios",
    "condition_reports",
    "config_from_dict",
    "fit_decay_rate",
    "integrate",
    "load_scenario",
    "metrics",
    "run_paper_suite",
    "summarize",
    "time_to_fraction",
    "write_csv",
]
