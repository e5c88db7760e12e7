"""
Two-mode Josephson Hamiltonian and its time-dependent parameters.

H = chi Jz^2 - Omega (cos(phi_c) Jx + sin(phi_c) Jy) + delta Jz

All frequencies are angular (rad/s), times in seconds. The coupling
phase phi_c is 0 for the free evolution and is used by the pulse model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from spin.SpinOperators import SpinOperators

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class HamiltonianParams:
    """
    Parameters of the Josephson Hamiltonian for a fixed atom number.

    Attributes
    ----------
    n_atoms : int
        Atom number N entering Lambda = N chi / Omega
    chi : float
        Nonlinearity (rad/s)
    omega : float
        Linear coupling strength (rad/s), >= 0
    delta : float
        Detuning (rad/s)
    coupling_phase : float
        Azimuth of the coupling axis (rad), 0 for -Omega Jx
    """

    n_atoms: int
    chi: float
    omega: float
    delta: float = 0.0
    coupling_phase: float = 0.0

    def __post_init__(self):
        if self.n_atoms < 1:
            raise ValueError(f"n_atoms must be >= 1, got {self.n_atoms}")
        if self.omega < 0:
            raise ValueError(f"omega must be >= 0, got {self.omega}")
        for name in ("chi", "omega", "delta", "coupling_phase"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite, got {getattr(self, name)}")

    @property
    def lambda_(self) -> float:
        """Dimensionless ratio Lambda = N chi / Omega"""
        if self.omega == 0:
            return math.inf if self.chi != 0 else 0.0
        return self.n_atoms * self.chi / self.omega

    @classmethod
    def from_lambda(
        cls, n_atoms: int, lambda_: float, omega: float, delta: float = 0.0
    ) -> "HamiltonianParams":
        """Parameters with chi chosen so that N chi / Omega = lambda_"""
        return cls(n_atoms=n_atoms, chi=lambda_ * omega / n_atoms, omega=omega, delta=delta)


@dataclass(frozen=True)
class LossModel:
    """
    Exponential atom loss and the resulting drift of chi and delta.

    N(t) = n0 exp(-t / tau)
    chi(N) = chi0 sqrt(n0 / N)
    delta(N) = 2 pi (delta0 - delta_n sqrt(N))

    Attributes
    ----------
    n0 : float
        Initial atom number
    tau : float
        Decay time (s); math.inf disables loss
    chi0 : float
        Nonlinearity at n0 (rad/s)
    delta0 : float
        Detuning offset (Hz)
    delta_n : float
        Atom-number dependent detuning coefficient (Hz per sqrt(atom))
    """

    n0: float
    tau: float = math.inf
    chi0: float = 0.0
    delta0: float = 0.0
    delta_n: float = 0.0

    def __post_init__(self):
        if self.n0 <= 0:
            raise ValueError(f"n0 must be > 0, got {self.n0}")
        if not self.tau > 0:
            raise ValueError(f"tau must be > 0, got {self.tau}")

    def atom_number(self, t: float) -> float:
        if math.isinf(self.tau):
            return float(self.n0)
        return self.n0 * math.exp(-t / self.tau)

    def chi_at(self, n: float) -> float:
        return self.chi0 * math.sqrt(self.n0 / n)

    def delta_at(self, n: float) -> float:
        """Detuning in rad/s"""
        return TWO_PI * (self.delta0 - self.delta_n * math.sqrt(n))

    def params_at(self, t: float, n_atoms: int, omega: float) -> HamiltonianParams:
        """Hamiltonian parameters at time t after preparation"""
        n = self.atom_number(t)
        return HamiltonianParams(
            n_atoms=n_atoms, chi=self.chi_at(n), omega=omega, delta=self.delta_at(n)
        )

    @classmethod
    def constant(
        cls, n_atoms: int, lambda_: float, omega: float, delta_hz: float = 0.0
    ) -> "LossModel":
        """Loss-free model with fixed Lambda and detuning"""
        return cls(n0=n_atoms, chi0=lambda_ * omega / n_atoms, delta0=delta_hz)


class ParameterSchedule:
    """
    Time-dependent Hamiltonian parameters t -> HamiltonianParams.

    A schedule flagged as constant is evolved with a single exact step.
    """

    def __init__(self, func: Callable[[float], HamiltonianParams], constant: bool = False):
        self._func = func
        self.constant = constant

    def __call__(self, t: float) -> HamiltonianParams:
        return self._func(t)

    @classmethod
    def from_params(cls, params: HamiltonianParams) -> "ParameterSchedule":
        return cls(lambda t: params, constant=True)

    @classmethod
    def from_loss_model(
        cls, loss: LossModel, n_atoms: int, omega: float
    ) -> "ParameterSchedule":
        return cls(
            lambda t: loss.params_at(t, n_atoms, omega),
            constant=math.isinf(loss.tau),
        )


def josephson_hamiltonian(
    params: HamiltonianParams, ops: SpinOperators
) -> np.ndarray:
    """
    Build the Hamiltonian matrix in the Dicke basis

    Parameters
    ----------
    params : HamiltonianParams
        chi, omega, delta and coupling phase
    ops : SpinOperators
        Operators for the same atom number

    Returns
    -------
    np.ndarray
        Hermitian (N+1)x(N+1) matrix, real when the coupling phase is 0

    Raises
    ------
    ValueError
        If params.n_atoms and ops.n_atoms disagree
    """
    if params.n_atoms != ops.n_atoms:
        raise ValueError(
            f"Dimension mismatch: params for N={params.n_atoms}, operators for N={ops.n_atoms}"
        )
    h = params.chi * ops.jz_squared + params.delta * ops.jz
    cos_c = math.cos(params.coupling_phase)
    sin_c = math.sin(params.coupling_phase)
    if params.coupling_phase == 0.0 or abs(sin_c) < 1e-15:
        return h - params.omega * cos_c * ops.jx
    return h - params.omega * (cos_c * ops.jx + sin_c * ops.jy)
