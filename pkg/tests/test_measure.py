"""
Tests for readout distributions, detection noise, rebinning, sampling and histogram files.
"""

import math
import sys
import tempfile
from pathlib import Path

import numpy as np

project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from measure.NoiseModel import NoiseModel
from measure.ProbabilityDistribution import EmpiricalDistribution, ProbabilityDistribution
from measure.histogram_io import read_histogram, write_histogram
from measure.readout import (
    convolve_noise,
    native_support,
    noise_kernel,
    outcome_distribution,
    rebin,
    sample,
)
from spin.DickeState import coherent_state


def _css_distribution(n=40, theta=0.0):
    return outcome_distribution(coherent_state(n, math.pi / 2, math.pi), alpha=0.0, theta=theta)


def test_native_support_is_symmetric():
    z = native_support(10)
    assert z[0] == -1.0 and z[-1] == 1.0 and z.size == 11
    assert np.allclose(np.diff(z), 0.2)


def test_equatorial_state_readout():
    """Measuring the -x coherent state gives a binomial centred on z = 0 with Var(z) = 1/N."""
    n = 40
    dist = _css_distribution(n)
    assert abs(dist.probs.sum() - 1.0) < 1e-12
    assert abs(dist.mean()) < 1e-10, f"mean {dist.mean()}"
    assert abs(dist.variance() - 1.0 / n) < 1e-10, f"variance {dist.variance()}"


def test_noise_width_in_z_units():
    noise = NoiseModel(sigma_det=6.0, sigma_loss=8.0)
    assert noise.sigma_total == 10.0
    assert abs(noise.sigma_z("total", 100) - 0.2) < 1e-15
    assert noise.sigma("none") == 0.0


def test_noise_kernel_normalized():
    kernel = noise_kernel(0.01, 0.05)
    assert abs(kernel.sum() - 1.0) < 1e-12
    assert np.allclose(kernel, kernel[::-1]), "kernel is not symmetric"


def test_convolution_adds_variance():
    """Convolution keeps normalization and the mean and adds sigma_z^2 to the variance."""
    n = 40
    dist = _css_distribution(n)
    noisy = convolve_noise(dist, NoiseModel(sigma_det=3.0), "det")
    sigma_z = 2 * 3.0 / n
    assert abs(noisy.probs.sum() - 1.0) < 1e-12
    assert abs(noisy.mean() - dist.mean()) < 1e-10
    assert abs(noisy.variance() - (dist.variance() + sigma_z**2)) < 1e-6, (
        f"variance {noisy.variance()} != {dist.variance() + sigma_z**2}"
    )
    assert noisy.n_bins > dist.n_bins, "support was not extended"


def test_zero_noise_is_identity():
    dist = _css_distribution()
    assert convolve_noise(dist, 0.0) is dist


def test_rebin_conserves_mass_and_lands_on_common_grid():
    """Rebinned distributions of different rotations share one lattice anchored at z = -1."""
    n = 40
    a = rebin(_css_distribution(n, 0.0), 4 * 2.0 / n)
    b = rebin(_css_distribution(n, 0.3), 4 * 2.0 / n)
    assert abs(a.probs.sum() - 1.0) < 1e-12
    assert abs(a.support[0] - (-1.0 + 1.5 * 2.0 / n)) < 1e-12, f"first centre {a.support[0]}"
    assert a.lattice_offset(b) == 0


def test_rebin_rejects_incommensurate_width():
    try:
        rebin(_css_distribution(40), 0.07)
    except ValueError:
        return
    raise AssertionError("an incommensurate width was accepted")


def test_sampling_reproduces_moments_and_is_seeded():
    dist = _css_distribution(40)
    draws = sample(dist, 20000, seed=7, spawn_key=(1, 2))
    again = sample(dist, 20000, seed=7, spawn_key=(1, 2))
    other = sample(dist, 20000, seed=7, spawn_key=(1, 3))
    assert draws.total == 20000 and draws.has_outcomes
    assert np.array_equal(draws.counts, again.counts), "same seed gave different counts"
    assert not np.array_equal(draws.counts, other.counts), "different streams gave equal counts"
    assert abs(draws.mean()) < 0.01, f"sample mean {draws.mean()}"
    assert abs(draws.variance() / dist.variance() - 1.0) < 0.05


def test_rebin_maps_outcomes():
    dist = _css_distribution(40)
    draws = sample(dist, 500, seed=1)
    coarse = rebin(draws, 2 * 2.0 / 40)
    assert coarse.total == 500
    assert np.array_equal(np.bincount(coarse.outcomes, minlength=coarse.n_bins), coarse.counts)


def test_histogram_round_trip():
    dist = _css_distribution(20, 0.2)
    draws = sample(dist, 300, seed=3)
    with tempfile.TemporaryDirectory() as tmp:
        write_histogram(Path(tmp) / "sampled.csv", draws, seed=3, evolution_time_ms=25.0)
        write_histogram(Path(tmp) / "exact.csv", dist)
        back, meta = read_histogram(Path(tmp) / "sampled.csv")
        exact, exact_meta = read_histogram(Path(tmp) / "exact.csv")
    assert isinstance(back, EmpiricalDistribution) and isinstance(exact, ProbabilityDistribution)
    assert np.array_equal(back.counts, draws.counts)
    assert abs(back.theta - 0.2) < 1e-12
    assert meta["kind"] == "sampled" and meta["evolution_time_ms"] == 25.0
    assert exact_meta["kind"] == "exact"
    assert np.allclose(exact.probs, dist.probs, atol=1e-11)


def test_missing_sidecar_is_an_error():
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "lonely.csv"
        path.write_text("z,count\n0,1\n")
        try:
            read_histogram(path)
        except ValueError:
            return
    raise AssertionError("a histogram without sidecar was accepted")


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
