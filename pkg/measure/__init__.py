"""
Outcome distributions of the imbalance z: Born rule, noise, binning and sampling.
"""

from measure.NoiseModel import NoiseModel
from measure.ProbabilityDistribution import EmpiricalDistribution, ProbabilityDistribution
from measure.readout import convolve_noise, make_rng, outcome_distribution, rebin, sample

__all__ = [
    "NoiseModel",
    "EmpiricalDistribution",
    "ProbabilityDistribution",
    "convolve_noise",
    "make_rng",
    "outcome_distribution",
    "rebin",
    "sample",
]
