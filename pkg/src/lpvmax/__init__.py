"""Identification of LPV state-space models through LPV-MAX predictors.

A moving-average model with exogenous inputs is fitted by pseudo-linear
regression and turned into a state-space model by Ho-Kalman realization.
"""

from .errors import (
    ConfigurationError,
    CoverageError,
    DegenerateReferenceError,
    FilterDivergedError,
    MonteCarloError,
    RankDeficiencyError,
    SimulationDivergedError,
)
from .experiment import ExperimentConfig, bfr, generate_signals, run_monte_carlo, run_pipeline
from .markov import NOISE, PROCESS, SubMarkovTable, count_parameters, impulse_oracle, sub_markov_from_ss
from .model import DataSet, LpvSsModel, random_stable_model, simulate
from .plr import EstimationReport, PlrConfig, excitation_order, plr_fit
from .predictor import MaxModel, gamma_coefficients, loss, predict, residuals
from .realization import HankelSpec, default_hankel_spec, realize, similarity_check
from .strings import StringSet, enumerate_strings, scheduling_product

__all__ = [name for name in dir() if not name.startswith("_")]
