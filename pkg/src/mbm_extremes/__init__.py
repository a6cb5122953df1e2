"""Extremes of multifractional Brownian motion: covariance model, exact grid
sampling, Pickands/Piterbarg constants by Monte Carlo and tail asymptotics."""
from .asymptotics import (AsymptoticResult, ConstantsProvider, Scenario, asymptotic_curve, classify,
                          evaluate)
from .constants_mc import ConstantEstimate, ConstantsProtocol, estimate_pickands, estimate_piterbarg
from .covariance import CovarianceModel, c_normalization, correlation_ratio, d_kernel, local_expansion_at
from .errors import (AsymptoticWarning, ConfigError, DomainError, FactorizationError, MbmError,
                     MissingConstantError, NumericalError, PreconditionError)
from .harness import estimate_exceedance, ratio_study, refinement_study
from .hurst import (Constant, HurstFunction, LogReciprocal, PeakPerturbation, PowerLaw, Tabulated,
                    holder_certificate, hurst_from_dict)
from .sampler import Grid, sample_fbm, sample_mbm, sup_over_path
from .special import gamma, log_gamma, log_normal_tail, normal_tail

__version__ = "0.1.0"
