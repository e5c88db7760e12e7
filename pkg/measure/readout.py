"""
From quantum states to binned outcome distributions and samples.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import erfcinv

from measure.NoiseModel import NoiseModel
from measure.ProbabilityDistribution import (
    LATTICE_TOLERANCE,
    EmpiricalDistribution,
    ProbabilityDistribution,
)
from spin.DickeState import DickeState
from spin.evolution import PulseProgram, readout_rotations
from spin.Hamiltonian import HamiltonianParams

# kernel tails beyond this mass are dropped
KERNEL_TAIL_MASS = 1e-9

Distribution = Union[ProbabilityDistribution, EmpiricalDistribution]


def make_rng(seed: Optional[int], spawn_key: Sequence[int] = ()) -> np.random.Generator:
    """
    Counter-based generator for one sampling task.

    The spawn key addresses independent streams under a single seed, so a
    task's draws do not depend on which other tasks exist.
    """
    sequence = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in spawn_key))
    return np.random.Generator(np.random.Philox(sequence))


def native_support(n_atoms: int) -> np.ndarray:
    """Bin centres z = 2m/N, m = -J..J"""
    return (2.0 * np.arange(n_atoms + 1) - n_atoms) / n_atoms


def outcome_distribution(
    state: DickeState,
    alpha: float = 0.0,
    theta: float = 0.0,
    program: Optional[PulseProgram] = None,
    background: Optional[HamiltonianParams] = None,
) -> ProbabilityDistribution:
    """
    Distribution of z after the tomography and final rotations

    Parameters
    ----------
    state : DickeState
        State after free evolution
    alpha : float
        Tomography rotation about x (rad)
    theta : float
        Final rotation about y (rad)
    program : PulseProgram, optional
        Pulse model for the two rotations
    background : HamiltonianParams, optional
        Parameters during the pulses, for the with-nonlinearity model

    Returns
    -------
    ProbabilityDistribution
        Born-rule probabilities on the native grid of width 2/N
    """
    rotated = readout_rotations(state, alpha, theta, program, background)
    n = state.n_atoms
    return ProbabilityDistribution(
        native_support(n),
        rotated.probabilities,
        bin_width=2.0 / n,
        alpha=alpha,
        theta=theta,
        n_atoms=n,
    )


def noise_kernel(bin_width: float, sigma_z: float) -> np.ndarray:
    """
    Discrete Gaussian evaluated at bin centres, normalized to unit sum.

    The half-width is chosen so that the dropped tails of the continuous
    Gaussian hold less than KERNEL_TAIL_MASS.
    """
    if sigma_z < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma_z}")
    if sigma_z == 0:
        return np.ones(1)
    half_width = int(math.ceil(math.sqrt(2.0) * sigma_z * erfcinv(KERNEL_TAIL_MASS) / bin_width)) + 1
    offsets = np.arange(-half_width, half_width + 1) * bin_width
    kernel = np.exp(-0.5 * (offsets / sigma_z) ** 2)
    return kernel / kernel.sum()


def convolve_values(
    support: np.ndarray, values: np.ndarray, bin_width: float, sigma_z: float
) -> Tuple[np.ndarray, np.ndarray]:
    """Full linear convolution with the noise kernel, support extended on both sides"""
    kernel = noise_kernel(bin_width, sigma_z)
    if kernel.size == 1:
        return np.array(support), np.array(values, dtype=float)
    half = kernel.size // 2
    out = np.convolve(values, kernel, mode="full")
    new_support = support[0] + (np.arange(out.size) - half) * bin_width
    return new_support, out


def convolve_noise(
    dist: ProbabilityDistribution,
    noise: Union[NoiseModel, float],
    which: str = "det",
    n_atoms: Optional[int] = None,
) -> ProbabilityDistribution:
    """
    Convolve a distribution with Gaussian atom-number noise

    Parameters
    ----------
    dist : ProbabilityDistribution
        Distribution on a uniform grid
    noise : NoiseModel or float
        Noise model, or a width in atoms
    which : str
        Channel of the noise model: 'det', 'loss', 'total' or 'none'
    n_atoms : int, optional
        Atom number, defaults to dist.n_atoms

    Returns
    -------
    ProbabilityDistribution
        Convolved distribution with sigma_z = 2 sigma / N, normalized
    """
    n = n_atoms if n_atoms is not None else dist.n_atoms
    if n is None:
        raise ValueError("convolve_noise needs the atom number")
    if isinstance(noise, NoiseModel):
        sigma_atoms = noise.sigma(which)
    else:
        sigma_atoms = float(noise)
        if sigma_atoms < 0:
            raise ValueError(f"sigma must be >= 0, got {sigma_atoms}")
    if sigma_atoms == 0:
        return dist
    support, probs = convolve_values(dist.support, dist.probs, dist.bin_width, 2.0 * sigma_atoms / n)
    return ProbabilityDistribution(
        support, probs / probs.sum(), dist.bin_width, dist.alpha, dist.theta, n
    )


def _group_index(support: np.ndarray, bin_width: float, factor: int, anchor: float) -> np.ndarray:
    k = (support - anchor) / bin_width
    k_int = np.round(k)
    if np.any(np.abs(k - k_int) > LATTICE_TOLERANCE):
        raise ValueError(f"support is not on the lattice anchored at z={anchor}")
    return np.floor_divide(k_int.astype(np.int64), factor)


def _rebin_factor(bin_width: float, new_width: float) -> int:
    ratio = new_width / bin_width
    factor = int(round(ratio))
    if factor < 1 or abs(ratio - factor) > 1e-9 * max(1.0, ratio):
        raise ValueError(
            f"new width {new_width:.6g} is not an integer multiple of bin width {bin_width:.6g}"
        )
    return factor


def _default_anchor(support: np.ndarray, bin_width: float) -> float:
    # bin centres of the native grid include z = -1
    k = (support[0] + 1.0) / bin_width
    if abs(k - round(k)) <= LATTICE_TOLERANCE:
        return -1.0
    return float(support[0])


def rebin_values(
    support: np.ndarray,
    values: np.ndarray,
    bin_width: float,
    new_width: float,
    anchor: Optional[float] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Sum values over groups of adjacent bins, returning the new centres and sums"""
    factor = _rebin_factor(bin_width, new_width)
    if factor == 1:
        return np.array(support), np.array(values)
    anchor = _default_anchor(support, bin_width) if anchor is None else anchor
    groups = _group_index(support, bin_width, factor, anchor)
    first = groups[0]
    n_groups = groups[-1] - first + 1
    sums = np.zeros(n_groups, dtype=np.asarray(values).dtype)
    np.add.at(sums, groups - first, values)
    centres = anchor + (np.arange(first, first + n_groups) * factor + 0.5 * (factor - 1)) * bin_width
    return centres, sums


def rebin(dist: Distribution, new_width: float, anchor: Optional[float] = None) -> Distribution:
    """
    Aggregate adjacent bins into bins of width new_width

    Groups start at the lattice point anchor (by default the z = -1 bin of
    the native grid) and run upward, so any two distributions of the same
    atom number land on a common grid.

    Parameters
    ----------
    dist : ProbabilityDistribution or EmpiricalDistribution
        Distribution to rebin
    new_width : float
        Integer multiple of dist.bin_width
    anchor : float, optional
        Centre of the lowest bin of the first group

    Returns
    -------
    Same type as dist
        Mass-conserving aggregation; empirical outcomes are mapped to the new bins

    Raises
    ------
    ValueError
        If new_width is not commensurate with the current width
    """
    factor = _rebin_factor(dist.bin_width, new_width)
    if factor == 1:
        return dist
    anchor = _default_anchor(dist.support, dist.bin_width) if anchor is None else anchor
    width = factor * dist.bin_width

    if isinstance(dist, EmpiricalDistribution):
        centres, counts = rebin_values(dist.support, dist.counts, dist.bin_width, width, anchor)
        outcomes = None
        if dist.outcomes is not None:
            groups = _group_index(dist.support, dist.bin_width, factor, anchor)
            outcomes = groups[dist.outcomes] - groups[0]
        return EmpiricalDistribution(
            centres,
            counts,
            width,
            dist.alpha,
            dist.theta,
            dist.n_atoms,
            outcomes=outcomes,
            n_support_nonzero=None,
        )

    centres, probs = rebin_values(dist.support, dist.probs, dist.bin_width, width, anchor)
    return ProbabilityDistribution(
        centres, probs, width, dist.alpha, dist.theta, dist.n_atoms
    )


def sample(
    dist: ProbabilityDistribution,
    m_draws: int,
    seed: Optional[int] = None,
    spawn_key: Sequence[int] = (),
) -> EmpiricalDistribution:
    """
    Draw m_draws independent outcomes from dist

    Parameters
    ----------
    dist : ProbabilityDistribution
        Distribution to sample
    m_draws : int
        Number of realizations M >= 1
    seed : int, optional
        Root seed
    spawn_key : sequence of int
        Stream address under the root seed

    Returns
    -------
    EmpiricalDistribution
        Counts plus the outcomes in draw order
    """
    if isinstance(m_draws, bool) or int(m_draws) != m_draws or m_draws < 1:
        raise ValueError(f"m_draws must be a positive integer, got {m_draws!r}")
    rng = make_rng(seed, spawn_key)
    outcomes = rng.choice(dist.n_bins, size=int(m_draws), p=dist.probs)
    counts = np.bincount(outcomes, minlength=dist.n_bins)
    return EmpiricalDistribution(
        dist.support,
        counts,
        dist.bin_width,
        dist.alpha,
        dist.theta,
        dist.n_atoms,
        outcomes=outcomes,
        n_support_nonzero=dist.occupied_bins(),
    )


def histogram(template: Distribution, outcomes: np.ndarray) -> EmpiricalDistribution:
    """Histogram of outcome bin indices on the grid of template"""
    outcomes = np.asarray(outcomes, dtype=np.int64)
    counts = np.bincount(outcomes, minlength=template.n_bins)
    return EmpiricalDistribution(
        template.support,
        counts,
        template.bin_width,
        template.alpha,
        template.theta,
        template.n_atoms,
        outcomes=outcomes,
    )
