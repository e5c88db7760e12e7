"""
Tests for the mean-field phase space: fixed points, trajectories, separatrix
and the unstable direction.
"""

import math
import sys
import warnings
from pathlib import Path

import numpy as np

project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from analysis.TimeScan import TimeScan
from meanfield.phase_space import (
    ClassicalParams,
    PhasePoint,
    classical_energy,
    fixed_points,
    separatrix,
    trajectories,
    trajectory,
    unstable_direction,
)
from spin.Hamiltonian import HamiltonianParams
from spin.qfi import phase_space_covariance

LAMBDA = 1.5


def _energy(z, phi, lam=LAMBDA, d=0.0):
    return 0.5 * lam * z**2 - np.sqrt(1 - z**2) * np.cos(phi) + d * z


def test_fixed_points_above_threshold():
    points = fixed_points(ClassicalParams(LAMBDA))
    assert len(points) == 4
    z_star = math.sqrt(1 - 1 / LAMBDA**2)
    coords = [(p.point.z, p.point.phi, p.stability) for p in points]
    assert coords[0] == (0.0, 0.0, "stable")
    assert coords[1][0] == -z_star and coords[1][2] == "stable"
    assert coords[2] == (0.0, math.pi, "unstable")
    assert coords[3][0] == z_star and coords[3][2] == "stable"


def test_fixed_points_below_threshold():
    points = fixed_points(ClassicalParams(0.5))
    assert len(points) == 2
    assert all(p.stable for p in points)


def test_bracketed_roots_match_closed_form():
    """A vanishing detuning takes the bracketing path and reproduces the analytic points."""
    analytic = fixed_points(ClassicalParams(LAMBDA))
    bracketed = fixed_points(ClassicalParams(LAMBDA, delta_over_omega=1e-12))
    assert len(bracketed) == len(analytic)
    for a, b in zip(analytic, bracketed):
        assert abs(a.point.z - b.point.z) < 1e-6, f"{a.point} vs {b.point}"
        assert a.point.phi == b.point.phi and a.stable == b.stable


def test_detuned_fixed_points_are_stationary():
    d = 0.1
    points = fixed_points(ClassicalParams(LAMBDA, delta_over_omega=d))
    assert len(points) == 4
    for p in points:
        z, phi = p.point.z, p.point.phi
        assert math.sin(phi) == 0.0 or abs(math.sin(phi)) < 1e-15
        residual = LAMBDA * z + z * math.cos(phi) / math.sqrt(1 - z * z) + d
        assert abs(residual) < 1e-9, f"dh/dz = {residual} at {p.point}"


def test_energy_is_conserved_and_frequency_matches():
    """Small oscillations about (0, 0) run at Omega sqrt(1 + Lambda)."""
    params = ClassicalParams(LAMBDA)
    path = trajectory(PhasePoint(1e-3, 0.0), params, (0.0, 40.0), 0.01)
    assert path.energy_drift < 1e-8, f"drift {path.energy_drift}"
    z, t = path.z, path.t
    idx = np.flatnonzero(np.sign(z[:-1]) * np.sign(z[1:]) < 0)
    crossings = t[idx] - z[idx] * (t[idx + 1] - t[idx]) / (z[idx + 1] - z[idx])
    frequency = math.pi * (crossings.size - 1) / (crossings[-1] - crossings[0])
    expected = math.sqrt(1 + LAMBDA)
    assert abs(frequency / expected - 1) < 5e-3, f"frequency {frequency} vs {expected}"


def test_self_trapped_and_outside_orbits():
    params = ClassicalParams(LAMBDA)
    inside, outside = trajectories(
        [PhasePoint(0.9, math.pi), PhasePoint(0.9628, math.pi)], params, (0.0, 60.0), 0.01, 2
    )
    assert inside.self_trapped, "orbit inside the lobe changed sign"
    assert not outside.self_trapped, "orbit outside the separatrix stayed on one side"
    assert outside.z.min() < 0 < outside.z.max()


def test_pole_start_is_stationary():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        path = trajectory(PhasePoint(1.0, 0.0), ClassicalParams(LAMBDA), (0.0, 1.0), 0.1)
    assert np.all(path.z == 1.0) and len(path.t) == 11
    assert caught, "no warning for a pole start"


def test_separatrix_passes_saddle():
    params = ClassicalParams(LAMBDA)
    frame = separatrix(params, n_phi=720)
    assert ((frame["phi"] == math.pi) & (frame["z"] == 0.0)).any(), "saddle missing"
    residual = _energy(frame["z"].to_numpy(), frame["phi"].to_numpy()) - 1.0
    assert np.max(np.abs(residual)) < 1e-9
    z_max = frame["z"].max()
    expected = math.sqrt(1 - ((2 - LAMBDA) / LAMBDA) ** 2)
    assert abs(z_max - expected) < 1e-4, f"z_max {z_max} vs {expected}"


def test_separatrix_needs_unstable_point():
    try:
        separatrix(ClassicalParams(0.5))
    except ValueError:
        return
    raise AssertionError("a separatrix was drawn without a hyperbolic point")


def test_classical_energy_scale():
    params = ClassicalParams(LAMBDA, n_omega=100.0)
    assert abs(classical_energy(PhasePoint(0.0, math.pi), params) - 100.0) < 1e-12


def test_unstable_direction_matches_quantum_anti_squeezing():
    """The anti-squeezed axis of the evolved state lines up with the unstable manifold."""
    omega = 2 * math.pi * 20.0
    rate, direction = unstable_direction(ClassicalParams(LAMBDA, omega=omega))
    assert abs(rate - omega * math.sqrt(LAMBDA - 1)) < 1e-9 * omega
    expected = np.array([1.0, math.sqrt(LAMBDA - 1)]) / math.sqrt(LAMBDA)
    assert np.allclose(direction, expected, atol=1e-12)

    state = TimeScan(n_atoms=430, lambda_=LAMBDA, omega=omega, verbose=False).state_at(0.015)
    _, vectors = np.linalg.eigh(phase_space_covariance(state))
    principal = vectors[:, -1]
    assert abs(principal @ direction) > math.cos(math.radians(5.0)), f"principal axis {principal}"


def test_params_from_hamiltonian():
    h = HamiltonianParams.from_lambda(100, LAMBDA, 2.0, delta=0.4)
    params = ClassicalParams.from_hamiltonian(h)
    assert abs(params.lambda_ - LAMBDA) < 1e-12
    assert abs(params.delta_over_omega - 0.2) < 1e-12
    assert params.n_omega == 100.0


if __name__ == "__main__":
    tests = [v for k, v in list(globals().items()) if k.startswith("test_") and callable(v)]
    for test in tests:
        try:
            test()
            print(f"  PASS  {test.__name__}")
        except AssertionError as e:
            print(f"  FAIL  {test.__name__}: {e}")
        except Exception as e:
            print(f"  ERROR {test.__name__}: {e}")
