"""Benchmark harness: generators, rolling-horizon simulation, measures, I/O and the CLI."""
from .experiment import ExperimentConfig, run_experiment
from .generate import generate_budgeted_instance, generate_small_instance, sample_scenario
from .measures import compute_measures, ecdf
from .simulate import SimulationRecord, hindsight_record, rolling_horizon

__all__ = ["ExperimentConfig", "SimulationRecord", "compute_measures", "ecdf",
           "generate_budgeted_instance", "generate_small_instance", "hindsight_record",
           "rolling_horizon", "run_experiment", "sample_scenario"]
