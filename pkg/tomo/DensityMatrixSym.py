"""
Density matrices on the symmetric subspace.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np

from spin.DickeState import DickeState

PHYSICAL_TOLERANCE = 1e-10


class DensityMatrixSym:
    """
    Hermitian, trace-one, positive operator on the spin-J subspace.

    Attributes
    ----------
    n_atoms : int
        Atom number N
    matrix : np.ndarray
        (N+1)x(N+1) complex matrix in the Dicke basis
    """

    def __init__(self, n_atoms: int, matrix: np.ndarray):
        rho = np.array(matrix, dtype=complex)
        if rho.shape != (n_atoms + 1, n_atoms + 1):
            raise ValueError(f"Expected a {(n_atoms + 1, n_atoms + 1)} matrix, got {rho.shape}")
        if np.max(np.abs(rho - rho.conj().T)) > PHYSICAL_TOLERANCE:
            raise ValueError("Density matrix is not Hermitian")
        trace = np.trace(rho).real
        if abs(trace - 1.0) > PHYSICAL_TOLERANCE:
            raise ValueError(f"Density matrix has trace {trace:.12g}")
        if np.linalg.eigvalsh(rho)[0] < -PHYSICAL_TOLERANCE:
            raise ValueError("Density matrix has a negative eigenvalue")
        rho = 0.5 * (rho + rho.conj().T)
        rho.setflags(write=False)
        self.n_atoms = int(n_atoms)
        self.matrix = rho

    @classmethod
    def from_state(cls, state: DickeState) -> "DensityMatrixSym":
        psi = state.amplitudes
        return cls(state.n_atoms, np.outer(psi, psi.conj()))

    @classmethod
    def maximally_mixed(cls, n_atoms: int) -> "DensityMatrixSym":
        return cls(n_atoms, np.eye(n_atoms + 1) / (n_atoms + 1))

    def fidelity(self, state: DickeState) -> float:
        """<psi|rho|psi>"""
        psi = state.amplitudes
        return float(np.vdot(psi, self.matrix @ psi).real)

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.matrix)).copy()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_atoms": self.n_atoms,
            "re": self.matrix.real.tolist(),
            "im": self.matrix.imag.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DensityMatrixSym":
        try:
            matrix = np.asarray(data["re"], dtype=float) + 1j * np.asarray(data["im"], dtype=float)
            return cls(int(data["n_atoms"]), matrix)
        except (KeyError, TypeError) as e:
            raise ValueError(f"Malformed density matrix document: {e}") from e

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def load(cls, path: Union[str, Path]) -> "DensityMatrixSym":
        with open(path, "r", encoding="utf-8") as f:
            return cls.from_dict(json.load(f))

    def __repr__(self) -> str:
        return f"DensityMatrixSym(n_atoms={self.n_atoms}, purity={self.purity():.4f})"
