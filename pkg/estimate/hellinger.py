"""
Hellinger distance between binned distributions and its sampling statistics.

d_H^2(P, Q) = 1/2 sum_z (sqrt(P_z) - sqrt(Q_z))^2 = 1 - sum_z sqrt(P_z Q_z)

For small rotations d_H^2(P(0), P(theta)) = F theta^2 / 8 + F' theta^3 / 16 + ...
Finite samples add an offset c0 and a quadratic bias c2.
"""

from __future__ import annotations

from typing import Optional, Tuple

import numpy as np

from estimate.DistributionFamily import DistributionFamily
from measure.ProbabilityDistribution import BinnedDistribution


def aligned_probs(
    f0: BinnedDistribution, f1: BinnedDistribution
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Probability vectors of f0 and f1 on their common support

    Raises
    ------
    ValueError
        If bin widths differ or the bin centres lie on different lattices
    """
    offset = f0.lattice_offset(f1)
    lo = min(0, offset)
    hi = max(f0.n_bins, offset + f1.n_bins)
    p = np.zeros(hi - lo)
    q = np.zeros(hi - lo)
    p[-lo : -lo + f0.n_bins] = f0.probs
    q[offset - lo : offset - lo + f1.n_bins] = f1.probs
    return p, q


def bhattacharyya(f0: BinnedDistribution, f1: BinnedDistribution) -> float:
    """Statistical overlap sum_z sqrt(P_z Q_z)"""
    p, q = aligned_probs(f0, f1)
    return float(np.sum(np.sqrt(p * q)))


def hellinger_squared(f0: BinnedDistribution, f1: BinnedDistribution) -> float:
    """
    Squared Hellinger distance between two distributions

    Parameters
    ----------
    f0, f1 : BinnedDistribution
        Exact or empirical distributions with a common binning

    Returns
    -------
    float
        1/2 sum (sqrt(P) - sqrt(Q))^2, in [0, 1]

    Raises
    ------
    ValueError
        If the binnings do not match
    """
    p, q = aligned_probs(f0, f1)
    d2 = 0.5 * float(np.sum((np.sqrt(p) - np.sqrt(q)) ** 2))
    return min(max(d2, 0.0), 1.0)


def hellinger_squared_arrays(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Row-wise squared Hellinger distance of aligned probability arrays"""
    return 0.5 * np.sum((np.sqrt(p) - np.sqrt(q)) ** 2, axis=-1)


def _inverse_sizes(m: int, m_other: Optional[int]) -> float:
    if m < 1 or (m_other is not None and m_other < 1):
        raise ValueError(f"sample sizes must be >= 1, got {m} and {m_other}")
    m_other = m if m_other is None else m_other
    return 1.0 / m + 1.0 / m_other


def bias_terms(
    n: int,
    m: int,
    fisher: float = 0.0,
    m_other: Optional[int] = None,
    family: Optional[DistributionFamily] = None,
    theta: float = 0.0,
) -> Tuple[float, float]:
    """
    Predicted sampling bias d_H^2 = c0 + (F/8 + c2) theta^2 + ...

    Parameters
    ----------
    n : int
        Number of occupied bins
    m : int
        Sample size of the first distribution
    fisher : float
        Fisher information F
    m_other : int, optional
        Sample size of the second distribution, defaults to m
    family : DistributionFamily, optional
        When given, c2 uses sum_z (d log P_z / d theta)^2 over the bins
        with P_z > 1/(M+1) instead of the estimate n F

    Returns
    -------
    tuple of float
        (c0, c2). With equal sizes c0 = (n-1)/(4M) and c2 ~ F (1+n) / (32 M).
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    inv = _inverse_sizes(m, m_other)
    c0 = (n - 1) * inv / 8.0
    # 1/M of the equal-size formula
    inv_m = inv / 2.0

    if family is None:
        score_sum = n * fisher
    else:
        probs = family.distribution(theta).probs
        dprobs = family.derivative(theta)
        m_eff = 1.0 / inv_m
        mask = probs > 1.0 / (m_eff + 1.0)
        score_sum = float(np.sum((dprobs[mask] / probs[mask]) ** 2))
    c2 = (fisher + score_sum) * inv_m / 32.0
    return c0, c2


def hellinger_variance_prediction(
    fisher: float, m: int, theta: float, m_other: Optional[int] = None
) -> float:
    """
    Leading-order variance of the sampled d_H^2 at small theta

    F theta^2 / (8 M) for equal sizes, F theta^2 (1/M0 + 1/M1) / 16 in general.
    """
    return fisher * theta**2 * _inverse_sizes(m, m_other) / 16.0
