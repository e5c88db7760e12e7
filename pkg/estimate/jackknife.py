"""
Block Jackknife correction of the squared Hellinger distance between samples.

Sample 1 (size M1) is cut into g = M1/h consecutive blocks of h draws and
sample 0 into the same number g of blocks. Leaving out block i of both
samples gives (d_H^2)_i, and

    d_corr = g d_H^2 - (g-1)/g sum_i (d_H^2)_i
    var    = (g-1)/g sum_i ((d_H^2)_i - mean)^2

removes the 1/M offset. Results are averaged over the configured h.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from estimate.hellinger import hellinger_squared_arrays
from measure.ProbabilityDistribution import EmpiricalDistribution


@dataclass(frozen=True)
class JackknifeConfig:
    """
    Block sizes of the Jackknife.

    Attributes
    ----------
    block_sizes : tuple of int, optional
        Explicit block sizes h; default is every divisor of M1 up to max_block_size
    max_block_size : int
        Largest default block size
    seed : int
        Seed for ordering histograms that carry no per-draw outcomes
    """

    block_sizes: Optional[Tuple[int, ...]] = None
    max_block_size: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.max_block_size < 1:
            raise ValueError(f"max_block_size must be >= 1, got {self.max_block_size}")
        if self.block_sizes is not None and any(h < 1 for h in self.block_sizes):
            raise ValueError(f"block sizes must be >= 1, got {self.block_sizes}")

    def resolve(self, m: int) -> List[int]:
        """Block sizes h with M = h g for sample size m"""
        if self.block_sizes is not None:
            return sorted(set(int(h) for h in self.block_sizes))
        return [h for h in range(1, min(self.max_block_size, m) + 1) if m % h == 0]


@dataclass
class JackknifeResult:
    """
    Corrected squared Hellinger distance and its standard error.

    Unpacks as (corrected, std_error).
    """

    corrected: float
    std_error: float
    raw: float
    per_block: Dict[int, Tuple[float, float]] = field(default_factory=dict)

    def __iter__(self) -> Iterator[float]:
        yield self.corrected
        yield self.std_error

    @property
    def block_sizes(self) -> List[int]:
        return sorted(self.per_block)

    def to_dict(self) -> dict:
        return {
            "corrected": self.corrected,
            "std_error": self.std_error,
            "raw": self.raw,
            "block_sizes": self.block_sizes,
        }


def jackknife_correct(full: float, leave_out: np.ndarray) -> Tuple[float, float]:
    """
    Jackknife bias correction from a full-sample estimate and g leave-one-block-out estimates

    Returns
    -------
    tuple of float
        (corrected estimate, Jackknife variance)
    """
    leave_out = np.asarray(leave_out, dtype=float)
    g = leave_out.size
    if g < 2:
        raise ValueError(f"Jackknife needs at least 2 blocks, got {g}")
    corrected = g * full - (g - 1) / g * leave_out.sum()
    variance = (g - 1) / g * float(np.sum((leave_out - leave_out.mean()) ** 2))
    return float(corrected), variance


def _block_counts(indices: np.ndarray, n_bins: int, n_blocks: int) -> np.ndarray:
    block_size = indices.size // n_blocks
    labels = np.arange(indices.size) // block_size
    flat = labels * n_bins + indices
    return np.bincount(flat, minlength=n_blocks * n_bins).reshape(n_blocks, n_bins)


def _common_indices(
    samples0: EmpiricalDistribution, samples1: EmpiricalDistribution, seed: int
) -> Tuple[np.ndarray, np.ndarray, int]:
    offset = samples0.lattice_offset(samples1)
    lo = min(0, offset)
    hi = max(samples0.n_bins, offset + samples1.n_bins)
    idx0 = samples0.outcome_indices(seed) - lo
    idx1 = samples1.outcome_indices(seed + 1) + offset - lo
    return idx0, idx1, hi - lo


def jackknife_hellinger(
    samples0: EmpiricalDistribution,
    samples1: EmpiricalDistribution,
    config: Optional[JackknifeConfig] = None,
) -> JackknifeResult:
    """
    Jackknife-corrected squared Hellinger distance between two samples

    Parameters
    ----------
    samples0 : EmpiricalDistribution
        Reference sample (theta = 0), size M0
    samples1 : EmpiricalDistribution
        Rotated sample, size M1; block sizes refer to this sample
    config : JackknifeConfig, optional
        Block sizes, defaults to the divisors of M1 up to 20

    Returns
    -------
    JackknifeResult
        Average over block sizes of the corrected value and standard error.
        Block sizes h for which M0 is not divisible by g = M1/h are skipped
        with a warning.

    Raises
    ------
    ValueError
        If the binnings do not match or no block size is usable
    """
    config = config or JackknifeConfig()
    idx0, idx1, n_bins = _common_indices(samples0, samples1, config.seed)
    m0, m1 = idx0.size, idx1.size

    total0 = np.bincount(idx0, minlength=n_bins)
    total1 = np.bincount(idx1, minlength=n_bins)
    raw = float(hellinger_squared_arrays(total0 / m0, total1 / m1))

    per_block: Dict[int, Tuple[float, float]] = {}
    for h in config.resolve(m1):
        if m1 % h != 0:
            warnings.warn(f"Block size h={h} does not divide M1={m1}, skipped", stacklevel=2)
            continue
        g = m1 // h
        if g < 2:
            continue
        if m0 % g != 0:
            warnings.warn(
                f"Block size h={h}: M0={m0} is not divisible into g={g} blocks, skipped",
                stacklevel=2,
            )
            continue
        blocks0 = _block_counts(idx0, n_bins, g)
        blocks1 = _block_counts(idx1, n_bins, g)
        loo0 = (total0[None, :] - blocks0) / (m0 - m0 // g)
        loo1 = (total1[None, :] - blocks1) / (m1 - h)
        leave_out = hellinger_squared_arrays(loo0, loo1)
        per_block[h] = jackknife_correct(raw, leave_out)

    if not per_block:
        raise ValueError(f"No usable Jackknife block size for M0={m0}, M1={m1}")

    corrected = float(np.mean([v[0] for v in per_block.values()]))
    variance = float(np.mean([v[1] for v in per_block.values()]))
    return JackknifeResult(
        corrected=corrected, std_error=math.sqrt(variance), raw=raw, per_block=per_block
    )
