"""Quasi-optimal nonlinear filtering for linear inverse problems."""

from .estimators import FeasibilitySpec, LseEstimate, feasible, lse, misfit, wiener_weights
from .linalg import LinAlgError, svd
from .model import GeneralModel, RefinedImage, RefinedModel, decompose, refine_image, standardize
from .quasiopt import QoConfig, QoSolution, SolverError, restore, solve
from .simulation import ModelCase, make_case, monte_carlo, rms
from .stats import chi2_cdf, chi2_quantile

__version__ = "0.1.0"
