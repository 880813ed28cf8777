"""Adaptive data analysis over Gaussian channels.

Closed-form query budgets for the Gaussian answering mechanism, their
point-to-point and over-the-air federated versions, and a Monte-Carlo
simulator with benign and adversarial analysts.
"""
__version__ = "0.1.0"

from .special_functions import (
    BracketedRoot,
    ConvergenceError,
    DomainError,
    NoSignChangeError,
    find_root,
    lambert_w0,
    lambert_w_minus1,
)
from .bounds import (
    AccuracySpec,
    Budget,
    MechanismPoint,
    OutOfRangeError,
    SystemConfig,
    alpha_of,
    f_lambda,
    g,
    g_inverse,
    k1,
    k2,
    k_budget,
    khat1_fit,
    lambda_star,
    optimal_amplitude,
    s_opt,
    snr_db,
    to_equivalent,
)

__all__ = [
    "__version__",
    "BracketedRoot",
    "ConvergenceError",
    "DomainError",
    "NoSignChangeError",
    "find_root",
    "lambert_w0",
    "lambert_w_minus1",
    "AccuracySpec",
    "Budget",
    "MechanismPoint",
    "OutOfRangeError",
    "SystemConfig",
    "alpha_of",
    "f_lambda",
    "g",
    "g_inverse",
    "k1",
    "k2",
    "k_budget",
    "khat1_fit",
    "lambda_star",
    "optimal_amplitude",
    "s_opt",
    "snr_db",
    "to_equivalent",
]
