"""
Unitary time evolution, rotation pulses and the experimental pulse program.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg

from spin.DickeState import DickeState, dicke_state
from spin.errors import EvolutionConvergenceError
from spin.Hamiltonian import (
    TWO_PI,
    HamiltonianParams,
    LossModel,
    ParameterSchedule,
    josephson_hamiltonian,
)
from spin.SpinOperators import SpinOperators, build_operators

PULSE_MODELS = ("instantaneous", "with-nonlinearity")

DEFAULT_INITIAL_STEP = 0.25e-3
DEFAULT_TOLERANCE = 1e-10
DEFAULT_MAX_HALVINGS = 10


@dataclass(frozen=True)
class PulseSpec:
    """
    A rotation pulse about an equatorial axis.

    Attributes
    ----------
    axis_phase : float
        Azimuth of the rotation axis (rad); 0 is +x, pi/2 is +y, pi is -x
    angle : float
        Rotation angle (rad); negative angles rotate about the opposite axis
    rabi_frequency : float
        Pulse Rabi frequency (rad/s), sets the duration |angle| / rabi_frequency
    phase_offset : float
        Constant offset added to axis_phase (rad)
    model : str
        "instantaneous" or "with-nonlinearity"
    """

    axis_phase: float
    angle: float
    rabi_frequency: float = TWO_PI * 320.0
    phase_offset: float = 0.0
    model: str = "instantaneous"

    def __post_init__(self):
        if self.model not in PULSE_MODELS:
            raise ValueError(f"Unknown pulse model {self.model!r}, expected one of {PULSE_MODELS}")
        if not self.rabi_frequency > 0:
            raise ValueError(f"rabi_frequency must be > 0, got {self.rabi_frequency}")

    @property
    def axis(self) -> float:
        return self.axis_phase + self.phase_offset

    @property
    def duration(self) -> float:
        return abs(self.angle) / self.rabi_frequency


@dataclass(frozen=True)
class PulseProgram:
    """
    Pulse settings of the measurement sequence.

    Rabi frequencies are angular (rad/s). The phase offset applies to the
    preparation pulse only.
    """

    preparation_rabi: float = TWO_PI * 320.0
    echo_rabi: float = TWO_PI * 320.0
    tomography_rabi: float = TWO_PI * 320.0
    rotation_rabi: float = TWO_PI * 160.0
    phase_offset: float = math.radians(3.0)
    model: str = "instantaneous"
    spin_echo: bool = True

    def __post_init__(self):
        if self.model not in PULSE_MODELS:
            raise ValueError(f"Unknown pulse model {self.model!r}, expected one of {PULSE_MODELS}")

    def preparation(self) -> PulseSpec:
        return PulseSpec(math.pi / 2, math.pi / 2, self.preparation_rabi, self.phase_offset, self.model)

    def echo(self) -> PulseSpec:
        return PulseSpec(math.pi, math.pi, self.echo_rabi, 0.0, self.model)

    def tomography(self, alpha: float) -> PulseSpec:
        return PulseSpec(0.0, alpha, self.tomography_rabi, 0.0, self.model)

    def rotation(self, theta: float) -> PulseSpec:
        return PulseSpec(math.pi / 2, theta, self.rotation_rabi, 0.0, self.model)


def _propagate(
    psi: np.ndarray,
    schedule: ParameterSchedule,
    ops: SpinOperators,
    t0: float,
    duration: float,
    n_steps: int,
) -> np.ndarray:
    dt = duration / n_steps
    for i in range(n_steps):
        h = josephson_hamiltonian(schedule(t0 + (i + 0.5) * dt), ops)
        w, v = linalg.eigh(h)
        psi = v @ (np.exp(-1j * w * dt) * (v.conj().T @ psi))
    return psi


def evolve(
    state: DickeState,
    schedule: ParameterSchedule,
    duration: float,
    tol: float = DEFAULT_TOLERANCE,
    t0: float = 0.0,
    initial_step: float = DEFAULT_INITIAL_STEP,
    max_halvings: int = DEFAULT_MAX_HALVINGS,
) -> DickeState:
    """
    Evolve a state under a piecewise-constant Hamiltonian.

    Each step uses the parameters at its midpoint and is exponentiated
    exactly through an eigendecomposition. Time-dependent schedules are
    refined by halving the step until the overlap defect
    1 - |<psi_dt|psi_dt/2>|^2 between successive refinements drops below tol.

    Parameters
    ----------
    state : DickeState
        Initial state
    schedule : ParameterSchedule
        Hamiltonian parameters as a function of the schedule clock
    duration : float
        Evolution time (s), >= 0
    tol : float
        Overlap-defect tolerance for step refinement
    t0 : float
        Schedule clock at the start of the evolution (s)
    initial_step : float
        Coarsest step (s)
    max_halvings : int
        Refinements allowed before giving up

    Returns
    -------
    DickeState
        The evolved state

    Raises
    ------
    ValueError
        If duration is negative
    EvolutionConvergenceError
        If the step-size refinement does not converge
    """
    if duration < 0:
        raise ValueError(f"duration must be >= 0, got {duration}")
    if duration == 0:
        return state

    ops = build_operators(state.n_atoms)
    psi0 = np.array(state.amplitudes)

    if schedule.constant:
        psi = _propagate(psi0, schedule, ops, t0, duration, 1)
        return DickeState(state.n_atoms, psi)

    n_steps = max(1, math.ceil(duration / initial_step))
    coarse = _propagate(psi0, schedule, ops, t0, duration, n_steps)
    defect = math.nan
    for _ in range(max_halvings):
        n_steps *= 2
        fine = _propagate(psi0, schedule, ops, t0, duration, n_steps)
        defect = 1.0 - abs(np.vdot(coarse, fine)) ** 2
        if defect < tol:
            return DickeState(state.n_atoms, fine)
        coarse = fine

    raise EvolutionConvergenceError(
        f"Evolution over {duration:.6g} s did not converge after {max_halvings} halvings "
        f"({n_steps} steps, overlap defect {defect:.3e} >= {tol:.1e})"
    )


def rotate(state: DickeState, axis_phase: float, angle: float) -> DickeState:
    """Exact rotation exp(-i angle J_n) about the equatorial axis at axis_phase"""
    ops = build_operators(state.n_atoms)
    return DickeState(state.n_atoms, ops.rotate(state.amplitudes, axis_phase, angle))


def apply_pulse(
    state: DickeState,
    pulse: PulseSpec,
    background: Optional[HamiltonianParams] = None,
    tol: float = DEFAULT_TOLERANCE,
) -> DickeState:
    """
    Apply a rotation pulse

    The instantaneous model applies exp(-i angle J_axis) exactly. The
    with-nonlinearity model keeps chi and delta of the background and
    replaces the coupling by the drive
    -Omega_p (cos(phi_d) Jx + sin(phi_d) Jy), phi_d = axis + pi,
    for a duration |angle| / Omega_p, which reduces to the instantaneous
    rotation when chi and delta vanish.

    Parameters
    ----------
    state : DickeState
        Input state
    pulse : PulseSpec
        Pulse to apply
    background : HamiltonianParams, optional
        Parameters during the pulse, required by the with-nonlinearity model

    Returns
    -------
    DickeState
        The rotated state
    """
    if pulse.angle == 0:
        return state
    if pulse.model == "instantaneous":
        return rotate(state, pulse.axis, pulse.angle)

    if background is None:
        raise ValueError("The with-nonlinearity pulse model needs background parameters")
    axis = pulse.axis if pulse.angle > 0 else pulse.axis + math.pi
    drive = HamiltonianParams(
        n_atoms=state.n_atoms,
        chi=background.chi,
        omega=pulse.rabi_frequency,
        delta=background.delta,
        coupling_phase=axis + math.pi,
    )
    return evolve(state, ParameterSchedule.from_params(drive), pulse.duration, tol=tol)


def prepare_and_evolve(
    n_atoms: int,
    loss: LossModel,
    evolution_time: float,
    omega: float,
    program: Optional[PulseProgram] = None,
    tol: float = DEFAULT_TOLERANCE,
) -> DickeState:
    """
    Preparation and free evolution of the sequence, before any readout pulse.

    |J,-J> is rotated by pi/2 about +y onto the unstable fixed point on the
    -x axis, evolved for t/2, echoed by a pi pulse about -x and evolved
    for another t/2. The loss clock runs during free evolution only.
    """
    program = program or PulseProgram()
    if evolution_time < 0:
        raise ValueError(f"evolution_time must be >= 0, got {evolution_time}")
    schedule = ParameterSchedule.from_loss_model(loss, n_atoms, omega)

    state = dicke_state(n_atoms, -n_atoms / 2.0)
    state = apply_pulse(state, program.preparation(), schedule(0.0), tol=tol)

    if not program.spin_echo:
        return evolve(state, schedule, evolution_time, tol=tol)

    half = evolution_time / 2.0
    state = evolve(state, schedule, half, tol=tol)
    state = apply_pulse(state, program.echo(), schedule(half), tol=tol)
    return evolve(state, schedule, half, tol=tol, t0=half)


def readout_rotations(
    state: DickeState,
    alpha: float,
    theta: float,
    program: Optional[PulseProgram] = None,
    background: Optional[HamiltonianParams] = None,
    tol: float = DEFAULT_TOLERANCE,
) -> DickeState:
    """Tomography rotation alpha about x followed by the rotation theta about y"""
    program = program or PulseProgram()
    state = apply_pulse(state, program.tomography(alpha), background, tol=tol)
    return apply_pulse(state, program.rotation(theta), background, tol=tol)


def run_sequence(
    n_atoms: int,
    loss: LossModel,
    evolution_time: float,
    alpha: float,
    theta: float,
    program: Optional[PulseProgram] = None,
    omega: float = TWO_PI * 20.0,
    tol: float = DEFAULT_TOLERANCE,
) -> DickeState:
    """
    Run the full measurement sequence and return the state before detection

    The default program rotates the preparation pulse axis by its 3 degree
    phase offset, so at evolution_time = 0 the state sits slightly off the
    unstable point (pi/2, pi). Pass PulseProgram(phase_offset=0.0) to start
    exactly on it.

    Parameters
    ----------
    n_atoms : int
        Atom number (Hilbert space dimension N+1)
    loss : LossModel
        Atom loss and parameter drift; LossModel.constant for fixed parameters
    evolution_time : float
        Total free evolution time t (s)
    alpha : float
        Tomography rotation angle about x (rad)
    theta : float
        Final rotation angle about y (rad)
    program : PulseProgram, optional
        Pulse settings, defaults to PulseProgram()
    omega : float
        Coupling during free evolution (rad/s)

    Returns
    -------
    DickeState
        State after the last rotation
    """
    program = program or PulseProgram()
    state = prepare_and_evolve(n_atoms, loss, evolution_time, omega, program, tol=tol)
    background = loss.params_at(evolution_time, n_atoms, omega)
    return readout_rotations(state, alpha, theta, program, background, tol=tol)
