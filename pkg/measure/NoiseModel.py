"""
Gaussian detection and loss noise on the atom number difference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

NOISE_CHANNELS = ("none", "det", "loss", "total")


@dataclass(frozen=True)
class NoiseModel:
    """
    Noise widths in atoms on N_b - N_a.

    Attributes
    ----------
    sigma_det : float
        Detection noise (atoms)
    sigma_loss : float
        Effective noise from atom loss during the sequence (atoms)
    """

    sigma_det: float = 6.0
    sigma_loss: float = 10.0

    def __post_init__(self):
        if self.sigma_det < 0 or self.sigma_loss < 0:
            raise ValueError(
                f"noise widths must be >= 0, got sigma_det={self.sigma_det}, "
                f"sigma_loss={self.sigma_loss}"
            )

    @property
    def sigma_total(self) -> float:
        """Quadrature sum of detection and loss noise"""
        return math.hypot(self.sigma_det, self.sigma_loss)

    def sigma(self, which: str) -> float:
        """Width in atoms for the channel 'none', 'det', 'loss' or 'total'"""
        if which == "none":
            return 0.0
        if which == "det":
            return self.sigma_det
        if which == "loss":
            return self.sigma_loss
        if which == "total":
            return self.sigma_total
        raise ValueError(f"Unknown noise channel {which!r}, expected one of {NOISE_CHANNELS}")

    def sigma_z(self, which: str, n_atoms: int) -> float:
        """Width in units of z = (N_b - N_a) / N"""
        return 2.0 * self.sigma(which) / n_atoms
