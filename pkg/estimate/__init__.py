"""
Fisher information, Hellinger distance statistics, squeezing and Bayesian estimation.
"""

from estimate.bayes import BayesResult, bayesian_estimate, split_reference
from estimate.DistributionFamily import DistributionFamily, GridFamily, RotationFamily
from estimate.fisher import cramer_rao_bound, fisher_direct, optimal_alpha
from estimate.FisherFit import FisherEstimate, fit_fisher
from estimate.hellinger import bias_terms, hellinger_squared, hellinger_variance_prediction
from estimate.jackknife import JackknifeConfig, jackknife_hellinger
from estimate.moments import moment_sensitivity
from estimate.squeezing import SqueezingResult, spin_squeezing, wineland_squeezing

__all__ = [
    "BayesResult",
    "bayesian_estimate",
    "split_reference",
    "DistributionFamily",
    "GridFamily",
    "RotationFamily",
    "cramer_rao_bound",
    "fisher_direct",
    "optimal_alpha",
    "FisherEstimate",
    "fit_fisher",
    "bias_terms",
    "hellinger_squared",
    "hellinger_variance_prediction",
    "JackknifeConfig",
    "jackknife_hellinger",
    "moment_sensitivity",
    "SqueezingResult",
    "spin_squeezing",
    "wineland_squeezing",
]
