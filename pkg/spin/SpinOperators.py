"""
Collective spin operators in the Dicke basis.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Tuple

import numpy as np
from scipy import linalg


@dataclass(frozen=True, eq=False)
class SpinOperators:
    """
    Collective spin operators for N two-level atoms in the symmetric subspace.

    The basis is ordered by index k = m + J, m = -J, ..., +J with J = N/2,
    so index 0 is the state with all atoms in the lower level.

    Attributes
    ----------
    n_atoms : int
        Number of atoms N
    jx, jy, jz : np.ndarray
        (N+1)x(N+1) operator matrices. jx and jz are real symmetric,
        jy is purely imaginary and Hermitian.
    """

    n_atoms: int
    jx: np.ndarray
    jy: np.ndarray
    jz: np.ndarray

    @property
    def j(self) -> float:
        """Total spin J = N/2"""
        return self.n_atoms / 2.0

    @property
    def dim(self) -> int:
        """Hilbert space dimension N+1"""
        return self.n_atoms + 1

    @cached_property
    def m_values(self) -> np.ndarray:
        """Jz eigenvalues m = -J, ..., +J"""
        return np.arange(self.dim) - self.j

    @cached_property
    def jz_squared(self) -> np.ndarray:
        return np.diag(self.m_values**2)

    @cached_property
    def _jx_eigen(self) -> Tuple[np.ndarray, np.ndarray]:
        return linalg.eigh(self.jx)

    def rotation_matrix(self, axis_phase: float, angle: float) -> np.ndarray:
        """
        Unitary exp(-i * angle * J_n) for the equatorial axis
        n = (cos(axis_phase), sin(axis_phase), 0).

        Parameters
        ----------
        axis_phase : float
            Azimuth of the rotation axis (rad)
        angle : float
            Rotation angle (rad)

        Returns
        -------
        np.ndarray
            (N+1)x(N+1) complex unitary matrix
        """
        return self.rotate(np.eye(self.dim, dtype=complex), axis_phase, angle)

    def rotate(self, vectors: np.ndarray, axis_phase: float, angle: float) -> np.ndarray:
        """
        Apply exp(-i * angle * J_n) to a state vector or to the columns of a matrix.

        Uses J_n = exp(-i phi Jz) Jx exp(i phi Jz) and the cached
        eigendecomposition of Jx.
        """
        w, v = self._jx_eigen
        frame = np.exp(-1j * axis_phase * self.m_values)
        phases = np.exp(-1j * angle * w)
        x = np.asarray(vectors, dtype=complex)
        if x.ndim == 1:
            y = v.T @ (np.conj(frame) * x)
            return frame * (v @ (phases * y))
        y = v.T @ (np.conj(frame)[:, None] * x)
        return frame[:, None] * (v @ (phases[:, None] * y))


@lru_cache(maxsize=16)
def build_operators(n_atoms: int) -> SpinOperators:
    """
    Build the collective spin operators for n_atoms atoms

    Parameters
    ----------
    n_atoms : int
        Number of atoms N >= 1

    Returns
    -------
    SpinOperators
        Matrices Jx, Jy, Jz of dimension N+1

    Raises
    ------
    ValueError
        If n_atoms is not a positive integer
    """
    if isinstance(n_atoms, bool) or not isinstance(n_atoms, (int, np.integer)):
        raise ValueError(f"n_atoms must be an integer, got {n_atoms!r}")
    if n_atoms < 1:
        raise ValueError(f"n_atoms must be >= 1, got {n_atoms}")

    n_atoms = int(n_atoms)
    j = n_atoms / 2.0
    m = np.arange(n_atoms + 1) - j

    # <m+1| J+ |m>
    ladder = np.sqrt(j * (j + 1.0) - m[:-1] * (m[:-1] + 1.0))
    j_plus = np.diag(ladder, -1)

    jx = 0.5 * (j_plus + j_plus.T)
    jy = -0.5j * (j_plus - j_plus.T)
    jz = np.diag(m)

    for op in (jx, jy, jz):
        op.setflags(write=False)

    return SpinOperators(n_atoms=n_atoms, jx=jx, jy=jy, jz=jz)
