"""
Spin moments and quantum Fisher information of pure states.
"""

from __future__ import annotations

from typing import Optional, Tuple

import numpy as np

from spin.DickeState import DickeState
from spin.SpinOperators import SpinOperators, build_operators


def _operators(state: DickeState, ops: Optional[SpinOperators]) -> SpinOperators:
    if ops is None:
        return build_operators(state.n_atoms)
    if ops.n_atoms != state.n_atoms:
        raise ValueError(f"Operators for N={ops.n_atoms} do not match state with N={state.n_atoms}")
    return ops


def spin_moments(
    state: DickeState, ops: Optional[SpinOperators] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Mean spin vector and symmetrized covariance matrix of (Jx, Jy, Jz)

    Returns
    -------
    mean : np.ndarray
        <J> of shape (3,)
    cov : np.ndarray
        C_ij = <{J_i, J_j}>/2 - <J_i><J_j>, shape (3, 3)
    """
    ops = _operators(state, ops)
    psi = state.amplitudes
    applied = [ops.jx @ psi, ops.jy @ psi, ops.jz @ psi]
    mean = np.array([np.vdot(psi, a).real for a in applied])
    cov = np.empty((3, 3))
    for i in range(3):
        for k in range(i, 3):
            # <J_i J_k> = <J_i psi | J_k psi>
            sym = np.vdot(applied[i], applied[k]).real
            cov[i, k] = cov[k, i] = sym - mean[i] * mean[k]
    return mean, cov


def bloch_vector(state: DickeState, ops: Optional[SpinOperators] = None) -> np.ndarray:
    """<J> normalized by J, a vector of length <= 1"""
    mean, _ = spin_moments(state, ops)
    return mean / (state.n_atoms / 2.0)


def qfi(state: DickeState, ops: Optional[SpinOperators] = None) -> float:
    """
    Quantum Fisher information for rotations, maximized over the generator axis.

    Equals 4 times the largest eigenvalue of the spin covariance matrix.
    A coherent state gives N, the GHZ state N^2.
    """
    norm2 = float(np.vdot(state.amplitudes, state.amplitudes).real)
    if abs(norm2 - 1.0) > 1e-10:
        raise ValueError(f"qfi needs a normalized state, |psi|^2 = {norm2}")
    _, cov = spin_moments(state, ops)
    return float(max(0.0, 4.0 * np.linalg.eigvalsh(cov)[-1]))


def phase_space_covariance(
    state: DickeState, ops: Optional[SpinOperators] = None
) -> np.ndarray:
    """
    Covariance of the classical coordinates (z, phi - pi) near the -x axis.

    Uses the linear map dz = 2 Jz / N and d(phi) = -2 Jy / N, valid for a
    state close to the unstable fixed point.
    """
    _, cov = spin_moments(state, ops)
    scale = 2.0 / state.n_atoms
    # rows: (Jz, Jy) with sign of the phase deviation
    transform = np.array([[0.0, 0.0, scale], [0.0, -scale, 0.0]])
    return transform @ cov @ transform.T
