"""
Collective spin states, the Josephson Hamiltonian and unitary evolution.
"""

from spin.DickeState import DickeState, coherent_state, dicke_state
from spin.evolution import PulseProgram, PulseSpec, apply_pulse, evolve, run_sequence
from spin.Hamiltonian import HamiltonianParams, LossModel, ParameterSchedule, josephson_hamiltonian
from spin.qfi import qfi
from spin.SpinOperators import SpinOperators, build_operators

__all__ = [
    "DickeState",
    "coherent_state",
    "dicke_state",
    "PulseProgram",
    "PulseSpec",
    "apply_pulse",
    "evolve",
    "run_sequence",
    "HamiltonianParams",
    "LossModel",
    "ParameterSchedule",
    "josephson_hamiltonian",
    "qfi",
    "SpinOperators",
    "build_operators",
]
