"""
State reconstruction from tomography histograms.
"""

from tomo.DensityMatrixSym import DensityMatrixSym
from tomo.husimi import HusimiMap, husimi, husimi_state
from tomo.mle import MLEResult, mle_reconstruct

__all__ = [
    "DensityMatrixSym",
    "HusimiMap",
    "husimi",
    "husimi_state",
    "MLEResult",
    "mle_reconstruct",
]
