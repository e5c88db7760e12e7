"""
Husimi Q function on the Bloch sphere.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np
import pandas as pd

from spin.DickeState import DickeState, css_magnitudes
from tomo.DensityMatrixSym import DensityMatrixSym

DEFAULT_GRID = 255


@dataclass
class HusimiMap:
    """
    Q(polar, azimuth) = <polar, azimuth| rho |polar, azimuth>, scaled to max 1.

    values[i, j] belongs to theta[i] and phi[j].
    """

    phi: np.ndarray
    theta: np.ndarray
    values: np.ndarray

    def argmax(self) -> Tuple[float, float]:
        """(theta, phi) of the maximum"""
        i, j = np.unravel_index(int(np.argmax(self.values)), self.values.shape)
        return float(self.theta[i]), float(self.phi[j])

    def to_frame(self) -> pd.DataFrame:
        """Long format with columns phi, theta, value"""
        phi_grid, theta_grid = np.meshgrid(self.phi, self.theta)
        return pd.DataFrame(
            {
                "phi": phi_grid.ravel(),
                "theta": theta_grid.ravel(),
                "value": self.values.ravel(),
            }
        )


def _grid(n_points: int) -> Tuple[np.ndarray, np.ndarray]:
    if n_points < 2:
        raise ValueError(f"n_points must be at least 2, got {n_points}")
    theta = np.linspace(0.0, np.pi, n_points)
    phi = np.linspace(0.0, 2.0 * np.pi, n_points, endpoint=False)
    return theta, phi


def husimi(rho: DensityMatrixSym, n_points: int = DEFAULT_GRID) -> HusimiMap:
    """
    Husimi map of a density matrix on an n_points x n_points grid

    theta spans [0, pi] inclusive and phi spans [0, 2 pi) without the endpoint.
    """
    theta, phi = _grid(n_points)
    n = rho.n_atoms
    k = np.arange(n + 1)
    mags = np.stack([css_magnitudes(n, t) for t in theta])  # (theta, k)
    phases = np.exp(-1j * np.outer(phi, k))  # (phi, k)

    values = np.empty((theta.size, phi.size))
    rho_t = rho.matrix.T
    for i in range(theta.size):
        coh = mags[i][None, :] * phases
        values[i] = np.real(np.sum(coh.conj() * (coh @ rho_t), axis=1))

    values = np.clip(values, 0.0, None)
    values /= values.max()
    return HusimiMap(phi=phi, theta=theta, values=values)


def husimi_state(state: DickeState, n_points: int = DEFAULT_GRID) -> HusimiMap:
    """Husimi map of a pure state, |<polar, azimuth|psi>|^2"""
    theta, phi = _grid(n_points)
    k = np.arange(state.dim)
    mags = np.stack([css_magnitudes(state.n_atoms, t) for t in theta])
    phases = np.exp(1j * np.outer(phi, k))
    # <css|psi> = sum_k mag_k e^{+i k phi} psi_k
    overlaps = mags @ (state.amplitudes[:, None] * phases.T)
    values = np.abs(overlaps) ** 2
    values /= values.max()
    return HusimiMap(phi=phi, theta=theta, values=values)
