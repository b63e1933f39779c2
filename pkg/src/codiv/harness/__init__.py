from .config import ConfigError, ExperimentConfig, build_scheme, load_config
from .diversity import DiversityFit, estimate_diversity
from .rate import RateResult, achievable_rate, mutual_information
from .sweep import SweepResult, read_csv, run_ser_sweep
