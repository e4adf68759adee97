from experiments.config import ExperimentConfig, load_config, parse_config
from experiments.plots import emit_plot_series
from experiments.runner import STAGES, run_experiment, run_stage
from experiments.synthetic import generate_synthetic_market, write_synthetic_market
