"""
Bayesian phase estimation from short outcome sequences.

With a flat prior the posterior is the likelihood L(theta) = prod_i P_{z_i}(theta).
For large m it approaches a Gaussian of variance 1/(m F).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from estimate.DistributionFamily import GridFamily
from measure.ProbabilityDistribution import EmpiricalDistribution
from measure.readout import histogram, make_rng

DEFAULT_HOLDOUT = 1000


@dataclass
class BayesResult:
    """
    Likelihood over the angle grid and its Gaussian fit.

    Attributes
    ----------
    m_sequence_length : int
        Number of outcomes m (discarded ones included)
    thetas : np.ndarray
        Angle grid (rad)
    log_likelihood : np.ndarray
        log L(theta_j), shifted so that its maximum is 0
    sigma2 : float or None
        Fitted Gaussian variance
    theta_center : float or None
        Fitted centre
    discarded_count : int
        Outcomes outside the retained z range
    concave : bool
        False when the quadratic fit opens upward
    retained_range : tuple of float
        (a, b) z range where every P_z(theta_j) > 0
    """

    m_sequence_length: int
    thetas: np.ndarray
    log_likelihood: np.ndarray
    sigma2: Optional[float]
    theta_center: Optional[float]
    discarded_count: int
    concave: bool
    retained_range: Tuple[float, float]

    @property
    def fitted(self) -> bool:
        return self.sigma2 is not None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "m": self.m_sequence_length,
            "sigma2": self.sigma2,
            "theta_center": self.theta_center,
            "discarded_count": self.discarded_count,
            "concave": self.concave,
            "retained_range": list(self.retained_range),
        }


def retained_bins(probs: np.ndarray) -> Tuple[int, int]:
    """
    Longest contiguous run [start, stop) of bins where every row of probs is > 0
    """
    valid = np.all(probs > 0, axis=0)
    best = (0, 0)
    start = None
    for i, ok in enumerate(np.append(valid, False)):
        if ok and start is None:
            start = i
        elif not ok and start is not None:
            if i - start > best[1] - best[0]:
                best = (start, i)
            start = None
    return best


def bayesian_estimate(sequence: Sequence[float], family: GridFamily) -> BayesResult:
    """
    Likelihood of a sequence of outcomes over the family's angle grid

    Parameters
    ----------
    sequence : sequence of float
        Measured z values, one per realization
    family : GridFamily
        Reference distributions P_z(theta_j); flat prior over the grid

    Returns
    -------
    BayesResult
        log L(theta_j) = sum_i log P_{z_i}(theta_j) over outcomes in the
        retained range [a, b], and a quadratic fit of log L giving
        sigma2 = -1/(2 a2) and theta_c = -a1/(2 a2). An empty sequence
        gives a flat likelihood without a fit.

    Raises
    ------
    ValueError
        If m > 0 but every outcome falls outside the retained range
    """
    z = np.asarray(sequence, dtype=float).reshape(-1)
    m = z.size
    start, stop = retained_bins(family.probs)
    if stop == start:
        raise ValueError("No z bin has nonzero probability at every angle of the family")
    retained_range = (float(family.support[start]), float(family.support[stop - 1]))
    thetas = family.thetas

    if m == 0:
        return BayesResult(0, thetas, np.zeros_like(thetas), None, None, 0, True, retained_range)

    idx = np.round((z - family.support[0]) / family.bin_width).astype(np.int64)
    inside = (idx >= start) & (idx < stop)
    discarded = int(m - np.count_nonzero(inside))
    if discarded == m:
        raise ValueError(f"All {m} outcomes lie outside the retained range {retained_range}")

    counts = np.bincount(idx[inside] - start, minlength=stop - start)
    log_p = np.log(family.probs[:, start:stop])
    log_l = log_p @ counts
    log_l = log_l - log_l.max()

    if thetas.size < 3:
        warnings.warn("Fewer than 3 angles, no Gaussian fit", stacklevel=2)
        return BayesResult(m, thetas, log_l, None, None, discarded, False, retained_range)

    a2, a1, _ = np.polyfit(thetas, log_l, 2)
    if not a2 < 0:
        warnings.warn("Log-likelihood is not concave, no Gaussian fit", stacklevel=2)
        return BayesResult(m, thetas, log_l, None, None, discarded, False, retained_range)
    return BayesResult(
        m_sequence_length=m,
        thetas=thetas,
        log_likelihood=log_l,
        sigma2=float(-1.0 / (2.0 * a2)),
        theta_center=float(-a1 / (2.0 * a2)),
        discarded_count=discarded,
        concave=True,
        retained_range=retained_range,
    )


def split_reference(
    reference: EmpiricalDistribution, holdout: int = DEFAULT_HOLDOUT, seed: int = 0
) -> Tuple[np.ndarray, EmpiricalDistribution]:
    """
    Hold out random draws of the reference sample for Bayesian sequences

    Returns
    -------
    tuple
        (held-out z values in random order, histogram of the remaining draws)
    """
    outcomes = reference.outcome_indices(seed)
    if not 0 < holdout < outcomes.size:
        raise ValueError(f"holdout must lie in (0, {outcomes.size}), got {holdout}")
    order = make_rng(seed, (1,)).permutation(outcomes.size)
    held = outcomes[order[:holdout]]
    rest = outcomes[np.sort(order[holdout:])]
    return reference.support[held], histogram(reference, rest)


def bayes_convergence(
    sequence: Sequence[float],
    family: GridFamily,
    m_values: Sequence[int],
    n_atoms: int,
) -> pd.DataFrame:
    """
    Mean of 1/(N m sigma^2) over non-overlapping subsequences of length m

    Converges to F/N as m grows.

    Returns
    -------
    pd.DataFrame
        Columns m, inverse_nm_sigma2, std, n_sequences, n_fitted
    """
    z = np.asarray(sequence, dtype=float)
    rows = []
    for m in m_values:
        n_seq = z.size // m
        values = []
        for k in range(n_seq):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                try:
                    res = bayesian_estimate(z[k * m : (k + 1) * m], family)
                except ValueError:
                    # every outcome of a short sequence fell outside the retained range
                    continue
            if res.fitted:
                values.append(1.0 / (n_atoms * m * res.sigma2))
        rows.append(
            {
                "m": int(m),
                "inverse_nm_sigma2": float(np.mean(values)) if values else math.nan,
                "std": float(np.std(values)) if values else math.nan,
                "n_sequences": n_seq,
                "n_fitted": len(values),
            }
        )
    return pd.DataFrame(rows, columns=["m", "inverse_nm_sigma2", "std", "n_sequences", "n_fitted"])
