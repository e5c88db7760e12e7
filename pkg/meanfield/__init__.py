"""
Classical phase space of the bosonic Josephson junction.
"""

from meanfield.phase_space import (
    ClassicalParams,
    FixedPoint,
    PhasePoint,
    Trajectory,
    classical_energy,
    fixed_points,
    separatrix,
    trajectories,
    trajectory,
    unstable_direction,
)

__all__ = [
    "ClassicalParams",
    "FixedPoint",
    "PhasePoint",
    "Trajectory",
    "classical_energy",
    "fixed_points",
    "separatrix",
    "trajectories",
    "trajectory",
    "unstable_direction",
]
