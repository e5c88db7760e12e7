"""
Pure states of N two-level atoms in the Dicke basis.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np
from scipy.special import gammaln

NORM_TOLERANCE = 1e-10


class DickeState:
    """
    Complex amplitude vector over the Jz eigenstates |J, m>, m = -J..J.

    Amplitudes are stored as a read-only copy; index k corresponds to m = k - N/2.
    """

    def __init__(self, n_atoms: int, amplitudes: np.ndarray):
        """
        Parameters
        ----------
        n_atoms : int
            Number of atoms N >= 1
        amplitudes : np.ndarray
            Complex vector of length N+1 with unit norm

        Raises
        ------
        ValueError
            If the length does not match N+1 or the vector is not normalized
        """
        if isinstance(n_atoms, bool) or int(n_atoms) != n_atoms or n_atoms < 1:
            raise ValueError(f"n_atoms must be a positive integer, got {n_atoms!r}")
        amps = np.array(amplitudes, dtype=complex).reshape(-1)
        if amps.shape[0] != int(n_atoms) + 1:
            raise ValueError(
                f"Expected {int(n_atoms) + 1} amplitudes for N={n_atoms}, got {amps.shape[0]}"
            )
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > NORM_TOLERANCE:
            raise ValueError(f"State is not normalized: |psi|^2 = {norm2:.15g}")
        amps.setflags(write=False)
        self.n_atoms = int(n_atoms)
        self.amplitudes = amps

    @classmethod
    def normalized(cls, n_atoms: int, amplitudes: np.ndarray) -> "DickeState":
        """Build a state after dividing the vector by its norm"""
        amps = np.asarray(amplitudes, dtype=complex)
        norm = np.linalg.norm(amps)
        if norm == 0.0:
            raise ValueError("Cannot normalize the zero vector")
        return cls(n_atoms, amps / norm)

    @property
    def dim(self) -> int:
        return self.n_atoms + 1

    @property
    def m_values(self) -> np.ndarray:
        return np.arange(self.dim) - self.n_atoms / 2.0

    @property
    def probabilities(self) -> np.ndarray:
        """Born-rule populations |amplitude_m|^2"""
        return np.abs(self.amplitudes) ** 2

    def overlap(self, other: "DickeState") -> complex:
        """Inner product <self|other>"""
        self._check_compatible(other)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def fidelity(self, other: "DickeState") -> float:
        """|<self|other>|^2"""
        return abs(self.overlap(other)) ** 2

    def _check_compatible(self, other: "DickeState") -> None:
        if other.n_atoms != self.n_atoms:
            raise ValueError(f"Atom numbers differ: {self.n_atoms} vs {other.n_atoms}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_atoms": self.n_atoms,
            "amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DickeState":
        try:
            n_atoms = data["n_atoms"]
            pairs = np.asarray(data["amplitudes"], dtype=float)
        except (KeyError, TypeError) as e:
            raise ValueError(f"Malformed DickeState document: {e}") from e
        if pairs.ndim != 2 or pairs.shape[1] != 2:
            raise ValueError("amplitudes must be a list of [re, im] pairs")
        return cls(n_atoms, pairs[:, 0] + 1j * pairs[:, 1])

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def load(cls, path: Union[str, Path]) -> "DickeState":
        with open(path, "r", encoding="utf-8") as f:
            return cls.from_dict(json.load(f))

    def __repr__(self) -> str:
        return f"DickeState(n_atoms={self.n_atoms})"


def dicke_state(n_atoms: int, m: float) -> DickeState:
    """Dicke state |J, m> for m in {-J, ..., +J}"""
    k = m + n_atoms / 2.0
    if abs(k - round(k)) > 1e-9 or not 0 <= round(k) <= n_atoms:
        raise ValueError(f"m={m} is not a valid magnetic quantum number for N={n_atoms}")
    amps = np.zeros(n_atoms + 1, dtype=complex)
    amps[int(round(k))] = 1.0
    return DickeState(n_atoms, amps)


def css_magnitudes(n_atoms: int, polar: float) -> np.ndarray:
    """
    Real amplitude magnitudes sqrt(C(N,k)) sin^k(polar/2) cos^(N-k)(polar/2).

    Evaluated in log space so that N up to several thousand does not overflow.
    The poles are returned as the exact limit states.
    """
    if not 0.0 <= polar <= np.pi:
        raise ValueError(f"polar angle must lie in [0, pi], got {polar}")
    k = np.arange(n_atoms + 1)
    s = np.sin(polar / 2.0)
    c = np.cos(polar / 2.0)
    if s == 0.0 or polar == 0.0:
        out = np.zeros(n_atoms + 1)
        out[0] = 1.0
        return out
    if c <= 0.0 or polar == np.pi:
        out = np.zeros(n_atoms + 1)
        out[-1] = 1.0
        return out
    log_binom = gammaln(n_atoms + 1) - gammaln(k + 1) - gammaln(n_atoms - k + 1)
    log_mag = 0.5 * log_binom + k * np.log(s) + (n_atoms - k) * np.log(c)
    mag = np.exp(log_mag)
    return mag / np.linalg.norm(mag)


def coherent_state(n_atoms: int, polar: float, azimuth: float) -> DickeState:
    """
    Coherent spin state pointing along (polar, azimuth) on the Bloch sphere

    The mean spin is J (sin(polar) cos(azimuth), sin(polar) sin(azimuth), -cos(polar)),
    so polar=0 is |J,-J> and polar=pi is |J,+J>. The unstable fixed point
    on the negative x axis is polar=pi/2, azimuth=pi.

    Parameters
    ----------
    n_atoms : int
        Number of atoms N
    polar : float
        Polar angle in [0, pi] (rad)
    azimuth : float
        Azimuthal angle (rad)

    Returns
    -------
    DickeState
        The coherent state with amplitudes proportional to tau^k,
        tau = exp(-i azimuth) tan(polar/2)
    """
    if isinstance(n_atoms, bool) or int(n_atoms) != n_atoms or n_atoms < 1:
        raise ValueError(f"n_atoms must be a positive integer, got {n_atoms!r}")
    n_atoms = int(n_atoms)
    mag = css_magnitudes(n_atoms, polar)
    k = np.arange(n_atoms + 1)
    return DickeState(n_atoms, mag * np.exp(-1j * k * azimuth))
