"""
Tests for maximum-likelihood state reconstruction and Husimi maps.
"""

import math
import sys
import warnings
from pathlib import Path

import numpy as np

project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from measure.readout import outcome_distribution, rebin, sample
from spin.DickeState import coherent_state
from spin.Hamiltonian import HamiltonianParams, ParameterSchedule
from spin.evolution import evolve
from tomo.DensityMatrixSym import DensityMatrixSym
from tomo.husimi import husimi, husimi_state
from tomo.mle import mle_reconstruct

N = 20
ALPHAS = np.arange(41) * (2 * math.pi / 41)
THETAS = (0.3, 0.9, 1.5)


def _twisted_state():
    """Short one-axis twisting from the unstable point: mildly squeezed, nearly pure."""
    params = HamiltonianParams.from_lambda(N, 1.5, 2 * math.pi * 20.0)
    return evolve(coherent_state(N, math.pi / 2, math.pi), ParameterSchedule.from_params(params), 0.01)


def _settings(state):
    return [outcome_distribution(state, a, t) for t in THETAS for a in ALPHAS]


def test_reconstruction_from_exact_frequencies():
    state = _twisted_state()
    result = mle_reconstruct(_settings(state), N)
    fidelity = result.rho.fidelity(state)
    assert fidelity >= 1 - 1e-6, f"fidelity {fidelity:.10f} after {result.iterations} iterations, gap {result.gap:.3g}"
    assert not result.under_determined and not result.stalled
    assert result.start == "least-squares"


def test_reconstruction_from_samples():
    state = _twisted_state()
    histograms = [
        sample(dist, 500, seed=3, spawn_key=(i,)) for i, dist in enumerate(_settings(state))
    ]
    result = mle_reconstruct(histograms, N)
    fidelity = result.rho.fidelity(state)
    assert fidelity >= 0.95, f"fidelity {fidelity:.4f}"


def test_single_cone_of_nineteen_angles():
    state = _twisted_state()
    alphas = np.arange(19) * (2 * math.pi / 19)
    histograms = [
        sample(outcome_distribution(state, a, 0.9), 500, seed=5, spawn_key=(i,))
        for i, a in enumerate(alphas)
    ]
    result = mle_reconstruct(histograms, N)
    fidelity = result.rho.fidelity(state)
    assert fidelity >= 0.95, f"fidelity {fidelity:.4f}"
    assert not result.stalled


def test_mixed_start_climbs_towards_maximum():
    state = _twisted_state()
    settings = _settings(state)
    mixed = DensityMatrixSym.maximally_mixed(N)
    result = mle_reconstruct(settings, N, max_iterations=300, initial=mixed)
    assert result.start == "given"
    assert result.log_likelihood[-1] > result.log_likelihood[0]
    assert result.gap >= -1e-9
    # eigen-gap bounds the distance to the maximum from above
    best = mle_reconstruct(settings, N)
    assert best.log_likelihood[-1] - result.log_likelihood[-1] <= result.gap + 1e-9


def test_likelihood_is_monotone():
    state = _twisted_state()
    histograms = [sample(dist, 200, seed=1, spawn_key=(i,)) for i, dist in enumerate(_settings(state))]
    result = mle_reconstruct(histograms, N, max_iterations=200)
    steps = np.diff(result.log_likelihood)
    assert np.all(steps >= -1e-10 * abs(result.log_likelihood[-1])), f"min step {steps.min()}"
    rho = result.rho.matrix
    assert abs(np.trace(rho).real - 1.0) < 1e-10
    assert np.linalg.eigvalsh(rho)[0] >= -1e-12


def test_single_setting_is_flagged():
    dist = outcome_distribution(coherent_state(N, 1.0, 0.0))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        result = mle_reconstruct([dist], N, max_iterations=50)
    assert result.under_determined
    assert any("unconstrained" in str(w.message) for w in caught)


def test_rebinned_histograms_rejected():
    dist = rebin(outcome_distribution(coherent_state(N, 1.0, 0.0)), 4.0 / N)
    try:
        mle_reconstruct([dist, dist], N)
    except ValueError:
        return
    raise AssertionError("histograms off the native grid were accepted")


def test_husimi_peaks_at_coherent_state_direction():
    state = coherent_state(N, math.pi / 2, math.pi)
    q = husimi_state(state, 255)
    theta, phi = q.argmax()
    assert abs(theta - math.pi / 2) <= math.pi / 254 + 1e-12, f"theta {theta}"
    assert abs(phi - math.pi) <= 2 * math.pi / 255 + 1e-12, f"phi {phi}"
    assert q.values.max() == 1.0


def test_husimi_of_density_matrix_matches_pure_state():
    state = _twisted_state()
    from_rho = husimi(DensityMatrixSym.from_state(state), 64)
    from_psi = husimi_state(state, 64)
    assert np.allclose(from_rho.values, from_psi.values, atol=1e-10)
    frame = from_rho.to_frame()
    assert list(frame.columns) == ["phi", "theta", "value"] and len(frame) == 64 * 64


def test_density_matrix_round_trip():
    rho = DensityMatrixSym.from_state(coherent_state(4, 0.8, 0.3))
    back = DensityMatrixSym.from_dict(rho.to_dict())
    assert np.allclose(back.matrix, rho.matrix, atol=1e-15)
    assert abs(back.purity() - 1.0) < 1e-12


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
