"""
Binned distributions of the population imbalance z.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

LATTICE_TOLERANCE = 1e-6


class BinnedDistribution:
    """
    Common part of exact and empirical distributions over uniform z bins.

    Subclasses provide the probs property.
    """

    def __init__(
        self,
        support: np.ndarray,
        bin_width: float,
        alpha: float = 0.0,
        theta: float = 0.0,
        n_atoms: Optional[int] = None,
    ):
        support = np.array(support, dtype=float).reshape(-1)
        if support.size == 0:
            raise ValueError("support must not be empty")
        if not bin_width > 0:
            raise ValueError(f"bin_width must be > 0, got {bin_width}")
        if support.size > 1:
            steps = np.diff(support)
            if np.any(steps <= 0):
                raise ValueError("support must be strictly increasing")
            if not np.allclose(steps, bin_width, rtol=1e-9, atol=1e-12):
                raise ValueError(f"support spacing does not match bin_width={bin_width}")
        support.setflags(write=False)
        self.support = support
        self.bin_width = float(bin_width)
        self.alpha = float(alpha)
        self.theta = float(theta)
        self.n_atoms = n_atoms

    @property
    def probs(self) -> np.ndarray:
        raise NotImplementedError

    @property
    def setting(self):
        """Measurement setting (alpha, theta) in rad"""
        return (self.alpha, self.theta)

    @property
    def n_bins(self) -> int:
        return self.support.size

    def mean(self) -> float:
        return float(np.dot(self.probs, self.support))

    def variance(self) -> float:
        mu = self.mean()
        return float(np.dot(self.probs, (self.support - mu) ** 2))

    def occupied_bins(self) -> int:
        """Number of bins with nonzero probability"""
        return int(np.count_nonzero(self.probs > 0))

    def lattice_offset(self, other: "BinnedDistribution") -> int:
        """
        Integer bin offset of other.support[0] relative to self.support[0]

        Raises
        ------
        ValueError
            If the bin widths differ or the bin centres are not on a common lattice
        """
        if not np.isclose(self.bin_width, other.bin_width, rtol=1e-9, atol=0.0):
            raise ValueError(
                f"Mismatched binning: bin widths {self.bin_width} and {other.bin_width}"
            )
        shift = (other.support[0] - self.support[0]) / self.bin_width
        offset = int(round(shift))
        if abs(shift - offset) > LATTICE_TOLERANCE:
            raise ValueError(
                f"Mismatched binning: bin centres offset by {shift:.6f} bins"
            )
        return offset


class ProbabilityDistribution(BinnedDistribution):
    """
    Exact outcome distribution P_z for one measurement setting.

    Attributes
    ----------
    support : np.ndarray
        Bin centres z, strictly increasing with spacing bin_width
    probs : np.ndarray
        Probabilities, nonnegative and summing to 1
    bin_width : float
        Bin width in z units
    alpha, theta : float
        Tomography and final rotation angles (rad)
    n_atoms : int, optional
        Atom number the distribution was computed for
    """

    def __init__(
        self,
        support: np.ndarray,
        probs: np.ndarray,
        bin_width: float,
        alpha: float = 0.0,
        theta: float = 0.0,
        n_atoms: Optional[int] = None,
    ):
        super().__init__(support, bin_width, alpha, theta, n_atoms)
        p = np.array(probs, dtype=float).reshape(-1)
        if p.shape != self.support.shape:
            raise ValueError(f"probs has {p.size} entries for {self.support.size} bins")
        if np.any(p < -1e-14):
            raise ValueError("probabilities must be nonnegative")
        p = np.clip(p, 0.0, None)
        total = p.sum()
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {total:.15g}, expected 1")
        p = p / total
        p.setflags(write=False)
        self._probs = p

    @property
    def probs(self) -> np.ndarray:
        return self._probs

    def with_probs(self, support: np.ndarray, probs: np.ndarray, bin_width: Optional[float] = None):
        """Copy with a new support and probability vector, same setting"""
        return ProbabilityDistribution(
            support,
            probs,
            self.bin_width if bin_width is None else bin_width,
            self.alpha,
            self.theta,
            self.n_atoms,
        )

    def __repr__(self) -> str:
        return (
            f"ProbabilityDistribution(n_bins={self.n_bins}, bin_width={self.bin_width:.6g}, "
            f"alpha={self.alpha:.6g}, theta={self.theta:.6g})"
        )


class EmpiricalDistribution(BinnedDistribution):
    """
    Sampled histogram with integer counts.

    When the draws were generated in this process the per-realization
    outcomes (bin indices in draw order) are kept, which the Jackknife
    and the Bayesian analysis need.
    """

    def __init__(
        self,
        support: np.ndarray,
        counts: np.ndarray,
        bin_width: float,
        alpha: float = 0.0,
        theta: float = 0.0,
        n_atoms: Optional[int] = None,
        outcomes: Optional[np.ndarray] = None,
        n_support_nonzero: Optional[int] = None,
    ):
        super().__init__(support, bin_width, alpha, theta, n_atoms)
        c = np.asarray(counts)
        if c.shape != self.support.shape:
            raise ValueError(f"counts has {c.size} entries for {self.support.size} bins")
        if not np.all(np.equal(np.mod(c, 1), 0)) or np.any(c < 0):
            raise ValueError("counts must be nonnegative integers")
        c = c.astype(np.int64)
        if c.sum() == 0:
            raise ValueError("histogram holds no counts")
        c.setflags(write=False)
        self.counts = c

        if outcomes is not None:
            o = np.asarray(outcomes, dtype=np.int64).reshape(-1)
            if o.size != c.sum():
                raise ValueError(f"{o.size} outcomes for {c.sum()} counts")
            if o.size and (o.min() < 0 or o.max() >= self.n_bins):
                raise ValueError("outcome index out of range")
            o.setflags(write=False)
            outcomes = o
        self.outcomes = outcomes
        self.n_support_nonzero = n_support_nonzero

    @property
    def total(self) -> int:
        """Number of draws M"""
        return int(self.counts.sum())

    @property
    def freqs(self) -> np.ndarray:
        return self.counts / self.total

    @property
    def probs(self) -> np.ndarray:
        return self.freqs

    @property
    def has_outcomes(self) -> bool:
        return self.outcomes is not None

    def outcome_indices(self, seed: int = 0) -> np.ndarray:
        """
        Per-realization outcomes as bin indices.

        Histograms read from disk carry no draw order; the counts are then
        expanded and put in a seeded random order.
        """
        if self.outcomes is not None:
            return np.array(self.outcomes)
        from measure.readout import make_rng

        expanded = np.repeat(np.arange(self.n_bins), self.counts)
        return make_rng(seed).permutation(expanded)

    def outcome_values(self, seed: int = 0) -> np.ndarray:
        return self.support[self.outcome_indices(seed)]

    def as_distribution(self) -> ProbabilityDistribution:
        return ProbabilityDistribution(
            self.support, self.freqs, self.bin_width, self.alpha, self.theta, self.n_atoms
        )

    def __repr__(self) -> str:
        return (
            f"EmpiricalDistribution(M={self.total}, n_bins={self.n_bins}, "
            f"alpha={self.alpha:.6g}, theta={self.theta:.6g})"
        )
