"""Experiment orchestration: configs, batteries, reports and the CLI."""

from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .experiment import run_experiment, trace_table
from .registry import BUILDERS, interp_battery, make_instance
from .studies import conjecture_probe, emit_plot_data, table1, write_table1
