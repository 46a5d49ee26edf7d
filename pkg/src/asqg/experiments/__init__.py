"""Reproducible experiment drivers and report emission."""

from .config import DEFAULTS, EXPERIMENTS, ExperimentConfig
from .report import ExperimentReport, PlotSpec, emit_report, read_csv
from .runners import RUNNERS, run_experiment

__all__ = ["DEFAULTS", "EXPERIMENTS", "ExperimentConfig", "ExperimentReport", "PlotSpec", "emit_report",
           "read_csv", "RUNNERS", "run_experiment"]
