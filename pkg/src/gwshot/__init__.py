"""Branching processes with very active immigration and their extremal
shot noise limits: prelimit simulation at astronomical population scales,
exact limit sampling up to a controlled truncation error, and statistical
verification of the limiting laws."""

from .gw import FluidConfig, PopulationPath, limit_profile, normalized_log_path, simulate_cohort
from .gwi import (
    CoupledPaths,
    GwiRun,
    conditional_mean_path,
    immigrant_log_draws,
    normalized_observable,
    run_coupled,
    simulate_y_path,
    truncated_y_path,
)
from .immigration import ImmigrationLaw
from .limit import (
    AtomSet,
    PrmParams,
    ShotNoiseSpec,
    fdd_cdf,
    marginal_cdf_extremal,
    marginal_cdf_negslope,
    marginal_cdf_posslope,
    sample_atoms,
    shot_noise_path,
    shot_noise_value,
)
from .lognum import LogMagnitude, log_plus, lse_add, scale_pow
from .offspring import OffspringFamily
from .paths import CadlagPath
from .stats import Sample, dkw_band, ecdf, j1_distance_bracket, ks_distance, uniform_distance

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "LogMagnitude", "lse_add", "scale_pow", "log_plus",
    "OffspringFamily",
    "ImmigrationLaw",
    "FluidConfig", "PopulationPath", "simulate_cohort", "normalized_log_path", "limit_profile",
    "GwiRun", "CoupledPaths", "simulate_y_path", "truncated_y_path",
    "conditional_mean_path", "immigrant_log_draws", "normalized_observable", "run_coupled",
    "PrmParams", "AtomSet", "ShotNoiseSpec", "sample_atoms", "shot_noise_value",
    "shot_noise_path", "marginal_cdf_negslope", "marginal_cdf_extremal",
    "marginal_cdf_posslope", "fdd_cdf",
    "Sample", "ecdf", "ks_distance", "dkw_band", "uniform_distance", "j1_distance_bracket",
    "CadlagPath",
]
