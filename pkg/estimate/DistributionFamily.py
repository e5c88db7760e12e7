"""
DistributionFamily abstract class for theta-indexed outcome distributions.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Optional, Sequence

import numpy as np

from measure.NoiseModel import NoiseModel
from measure.ProbabilityDistribution import BinnedDistribution, ProbabilityDistribution
from measure.readout import (
    convolve_noise,
    convolve_values,
    native_support,
    outcome_distribution,
    rebin,
    rebin_values,
)
from spin.DickeState import DickeState
from spin.SpinOperators import build_operators


class DistributionFamily(ABC):
    """
    Abstract base class for families P_z(theta).

    Subclasses return the distribution at a rotation angle and may supply
    the exact derivative dP_z/dtheta.
    """

    @abstractmethod
    def name(self) -> str:
        """
        Returns the family name

        Returns
        -------
        str
            A short description of the family
        """
        pass

    @abstractmethod
    def distribution(self, theta: float) -> BinnedDistribution:
        """
        Distribution at rotation angle theta

        Parameters
        ----------
        theta : float
            Rotation angle (rad)

        Returns
        -------
        BinnedDistribution
            Distribution with a probs vector

        Raises
        ------
        ValueError
            If the family is not defined at theta
        """
        pass

    def has_derivative(self) -> bool:
        """True when derivative() is exact"""
        return False

    def derivative(self, theta: float) -> np.ndarray:
        """dP_z/dtheta on the support of distribution(theta)"""
        raise NotImplementedError(f"{self.name()} has no analytic derivative")

    def grid_step(self) -> Optional[float]:
        """Spacing of the theta grid, None when any theta is allowed"""
        return None


def _align(dists: Sequence[BinnedDistribution]):
    """Common support for a set of distributions on one lattice"""
    ref = dists[0]
    offsets = [ref.lattice_offset(d) for d in dists]
    lo = min(offsets)
    hi = max(o + d.n_bins for o, d in zip(offsets, dists))
    support = ref.support[0] + (np.arange(lo, hi)) * ref.bin_width
    probs = np.zeros((len(dists), hi - lo))
    for i, (o, d) in enumerate(zip(offsets, dists)):
        probs[i, o - lo : o - lo + d.n_bins] = d.probs
    return support, probs


class GridFamily(DistributionFamily):
    """
    Family given by distributions at a finite set of angles.

    All members are placed on a common support, so bins missing in one
    distribution appear with probability 0.
    """

    def __init__(self, thetas: Sequence[float], distributions: Sequence[BinnedDistribution]):
        """
        Parameters
        ----------
        thetas : sequence of float
            Rotation angles (rad), distinct
        distributions : sequence of BinnedDistribution
            Exact or empirical distributions, one per angle, on a common lattice
        """
        if len(thetas) != len(distributions):
            raise ValueError(f"{len(thetas)} angles for {len(distributions)} distributions")
        if len(thetas) == 0:
            raise ValueError("GridFamily needs at least one distribution")
        order = np.argsort(np.asarray(thetas, dtype=float))
        self.thetas = np.asarray(thetas, dtype=float)[order]
        if np.any(np.diff(self.thetas) <= 0):
            raise ValueError("GridFamily angles must be distinct")
        members = [distributions[i] for i in order]
        self.support, self.probs = _align(members)
        self.bin_width = members[0].bin_width
        self.n_atoms = members[0].n_atoms
        self.alpha = members[0].alpha

    def name(self) -> str:
        return f"GridFamily({self.thetas.size} angles)"

    def index_of(self, theta: float) -> int:
        hits = np.flatnonzero(np.isclose(self.thetas, theta, rtol=0.0, atol=1e-12))
        if hits.size == 0:
            raise ValueError(f"theta={theta} is not on the family grid")
        return int(hits[0])

    def contains(self, theta: float) -> bool:
        return bool(np.any(np.isclose(self.thetas, theta, rtol=0.0, atol=1e-12)))

    def distribution(self, theta: float) -> ProbabilityDistribution:
        return ProbabilityDistribution(
            self.support,
            self.probs[self.index_of(theta)],
            self.bin_width,
            self.alpha,
            theta,
            self.n_atoms,
        )

    def grid_step(self) -> Optional[float]:
        if self.thetas.size < 2:
            return None
        steps = np.diff(self.thetas)
        return float(steps.min())


class RotationFamily(DistributionFamily):
    """
    Readout of a fixed state after a tomography rotation alpha about x
    and a rotation theta about y, with optional noise and rebinning.

    The derivative is exact: for psi(theta) = exp(-i theta Jy) psi_alpha,
    dP_m/dtheta = 2 Re(conj(psi_m) (-i Jy psi)_m). Noise convolution and
    rebinning are linear and are applied to it unchanged.
    """

    def __init__(
        self,
        state: DickeState,
        alpha: float = 0.0,
        noise: Optional[NoiseModel] = None,
        which: str = "det",
        bin_width: Optional[float] = None,
    ):
        self.state = state
        self.alpha = float(alpha)
        self.noise = noise
        self.which = which
        self.bin_width = bin_width
        self._ops = build_operators(state.n_atoms)
        self._psi_alpha = self._ops.rotate(state.amplitudes, 0.0, self.alpha)

    def name(self) -> str:
        return f"RotationFamily(N={self.state.n_atoms}, alpha={self.alpha:.4g})"

    def _sigma_z(self) -> float:
        if self.noise is None:
            return 0.0
        return self.noise.sigma_z(self.which, self.state.n_atoms)

    def distribution(self, theta: float) -> ProbabilityDistribution:
        dist = outcome_distribution(self.state, self.alpha, theta)
        if self.noise is not None:
            dist = convolve_noise(dist, self.noise, self.which)
        if self.bin_width is not None:
            dist = rebin(dist, self.bin_width)
        return dist

    def has_derivative(self) -> bool:
        return True

    def derivative(self, theta: float) -> np.ndarray:
        n = self.state.n_atoms
        psi = self._ops.rotate(self._psi_alpha, np.pi / 2, theta)
        dpsi = -1j * (self._ops.jy @ psi)
        values = 2.0 * np.real(np.conj(psi) * dpsi)
        support = native_support(n)
        width = 2.0 / n
        sigma_z = self._sigma_z()
        if sigma_z > 0:
            support, values = convolve_values(support, values, width, sigma_z)
        if self.bin_width is not None:
            support, values = rebin_values(support, values, width, self.bin_width)
        return values
