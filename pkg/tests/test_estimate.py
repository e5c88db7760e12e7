"""
Tests for Fisher information estimation: Hellinger distance, Jackknife,
the small-angle fit, squeezing, Bayesian estimation and moments.
"""

import math
import sys
import warnings
from pathlib import Path

import numpy as np

project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from estimate.DistributionFamily import GridFamily, RotationFamily
from estimate.FisherFit import exact_estimate, fit_fisher
from estimate.bayes import bayes_convergence, bayesian_estimate, split_reference
from estimate.fisher import cramer_rao_bound, fisher_direct
from estimate.hellinger import (
    bhattacharyya,
    bias_terms,
    hellinger_squared,
    hellinger_squared_arrays,
    hellinger_variance_prediction,
)
from estimate.jackknife import JackknifeConfig, jackknife_hellinger
from estimate.moments import fringe, moment_sensitivity
from estimate.squeezing import spin_squeezing, squeezing_from_distributions, wineland_squeezing
from measure.ProbabilityDistribution import ProbabilityDistribution
from measure.readout import make_rng, outcome_distribution, rebin, sample
from metrics.HellingerMetric import HellingerMetric
from metrics.JackknifeHellingerMetric import JackknifeHellingerMetric
from pipeline.RunConfig import DEFAULT_THETAS_DEG
from spin.DickeState import coherent_state
from spin.errors import DerivativeStabilityError
from spin.qfi import qfi

N = 40
STEP = 0.01


def _css():
    return coherent_state(N, math.pi / 2, math.pi)


def _grid(thetas, n=N):
    state = coherent_state(n, math.pi / 2, math.pi)
    return GridFamily(thetas, [outcome_distribution(state, 0.0, t) for t in thetas])


def _uniform(n_bins=10):
    return ProbabilityDistribution(np.arange(n_bins) * 0.1, np.full(n_bins, 1.0 / n_bins), 0.1)


def test_hellinger_identities():
    p = outcome_distribution(_css(), 0.0, 0.0)
    q = outcome_distribution(_css(), 0.0, 0.2)
    assert hellinger_squared(p, p) == 0.0
    assert abs(hellinger_squared(p, q) - (1.0 - bhattacharyya(p, q))) < 1e-12
    left = ProbabilityDistribution([0.0, 0.1], [1.0, 0.0], 0.1)
    right = ProbabilityDistribution([0.3, 0.4], [0.0, 1.0], 0.1)
    assert abs(hellinger_squared(left, right) - 1.0) < 1e-15, "disjoint supports should give 1"
    assert HellingerMetric().compute(p, q) == hellinger_squared(p, q)


def test_hellinger_of_coherent_states():
    """For two coherent states d_H^2 = 1 - cos^N(theta / 2) exactly."""
    p = outcome_distribution(_css(), 0.0, 0.0)
    for theta in (0.01, 0.1, 0.5):
        q = outcome_distribution(_css(), 0.0, theta)
        expected = 1.0 - math.cos(theta / 2) ** N
        assert abs(hellinger_squared(p, q) - expected) < 1e-12, f"theta={theta}"


def test_mismatched_binning_rejected():
    a = ProbabilityDistribution([0.0, 0.1], [0.5, 0.5], 0.1)
    b = ProbabilityDistribution([0.05, 0.15], [0.5, 0.5], 0.1)
    try:
        hellinger_squared(a, b)
    except ValueError:
        return
    raise AssertionError("bins on different lattices were compared")


def test_sampling_bias_and_jackknife():
    """Two samples of one distribution sit at (n-1)/(4M) on average; the Jackknife removes it."""
    for n_bins in (21, 51):
        dist = _uniform(n_bins)
        for m in (500, 2000):
            c0, _ = bias_terms(n_bins, m)
            assert abs(c0 - (n_bins - 1) / (4 * m)) < 1e-15
            rng = make_rng(11, (n_bins, m))
            raw, corrected = [], []
            for _ in range(300):
                a = sample(dist, m, seed=int(rng.integers(2**31)))
                b = sample(dist, m, seed=int(rng.integers(2**31)))
                result = jackknife_hellinger(a, b)
                raw.append(result.raw)
                corrected.append(result.corrected)
            label = f"n={n_bins}, M={m}"
            assert abs(np.mean(raw) / c0 - 1.0) < 0.1, f"{label}: mean raw {np.mean(raw)} vs c0 {c0}"
            assert abs(np.mean(corrected)) < 0.2 * c0, f"{label}: mean corrected {np.mean(corrected)}"


def test_hellinger_variance_at_small_angles():
    """Spread of the sampled d_H^2 follows F theta^2 / (8M) once the theta = 0 spread is removed."""
    n, m, reps = 400, 2000, 1000
    state = coherent_state(n, math.pi / 2, math.pi)
    rng = make_rng(21)

    def sampled_d2(theta):
        p = outcome_distribution(state, 0.0, 0.0).probs
        q = outcome_distribution(state, 0.0, theta).probs
        counts0 = rng.multinomial(m, p / p.sum(), size=reps)
        counts1 = rng.multinomial(m, q / q.sum(), size=reps)
        return hellinger_squared_arrays(counts0 / m, counts1 / m)

    floor = np.var(sampled_d2(0.0), ddof=1)
    for degrees in (1.0, 1.5):
        theta = math.radians(degrees)
        excess = np.var(sampled_d2(theta), ddof=1) - floor
        predicted = hellinger_variance_prediction(float(n), m, theta)
        assert abs(excess / predicted - 1.0) < 0.2, f"theta={degrees} deg: {excess:.3g} vs {predicted:.3g}"


def test_unequal_sample_sizes_reduce_to_equal_case():
    f, theta = 40.0, 0.02
    assert abs(hellinger_variance_prediction(f, 500, theta) - f * theta**2 / (8 * 500)) < 1e-18
    assert abs(hellinger_variance_prediction(f, 2000, theta, 500) - f * theta**2 * (1 / 2000 + 1 / 500) / 16) < 1e-18
    c0, _ = bias_terms(21, 2000, m_other=500)
    assert abs(c0 - 20 * (1 / 2000 + 1 / 500) / 8) < 1e-15


def test_exact_estimate():
    est = exact_estimate(860.0, 430)
    assert est.method == "exact" and est.fisher_per_atom == 2.0
    assert est.ci68 == (860.0, 860.0)
    assert est.separable_bound_exceeded


def test_jackknife_block_sizes():
    dist = _uniform(10)
    a = sample(dist, 100, seed=1)
    b = sample(dist, 100, seed=2)
    result = jackknife_hellinger(a, b, JackknifeConfig(max_block_size=10))
    assert result.block_sizes == [1, 2, 4, 5, 10]
    corrected, std_error = result
    assert std_error > 0
    metric = JackknifeHellingerMetric(JackknifeConfig(max_block_size=10))
    assert metric.compute(a, b) == corrected
    assert metric.uncertainty() == std_error


def test_jackknife_skips_indivisible_reference():
    dist = _uniform(10)
    a = sample(dist, 90, seed=1)
    b = sample(dist, 100, seed=2)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        result = jackknife_hellinger(a, b, JackknifeConfig(block_sizes=(1, 2, 10)))
    # g = 100 and 50 do not divide M0 = 90
    assert sum("not divisible" in str(w.message) for w in caught) == 2
    assert result.block_sizes == [10]


def test_fit_recovers_fisher_of_coherent_state():
    """Exact distances of a coherent state give F/N = 1."""
    thetas = np.arange(-10, 11) * STEP
    p0 = outcome_distribution(_css(), 0.0, 0.0)
    d2 = [hellinger_squared(p0, outcome_distribution(_css(), 0.0, t)) for t in thetas]
    estimate = fit_fisher(thetas, d2, n_atoms=N, degree=4)
    assert abs(estimate.fisher_per_atom - 1.0) < 1e-3, f"F/N = {estimate.fisher_per_atom}"
    assert estimate.n_points == 20, "the reference angle should be dropped"
    assert abs(estimate.offset) < 1e-6
    assert not estimate.clipped


def test_fit_interval_coverage():
    """Jackknife-weighted fits on M = 2000/500 samples: ci68 covers the exact F about 68% of the time."""
    n = 430
    width = 4.0 / n
    css = coherent_state(n, math.pi / 2, math.pi)
    exact = fisher_direct(RotationFamily(css, alpha=0.0, bin_width=width))
    thetas = [math.radians(d) for d in DEFAULT_THETAS_DEG]
    dists = [rebin(outcome_distribution(css, 0.0, t), width) for t in thetas]
    ref_index = thetas.index(0.0)
    rotated = [t for t in thetas if t != 0.0]

    covered, replicas = 0, 300
    for r in range(replicas):
        reference = sample(dists[ref_index], 2000, seed=17, spawn_key=(r, ref_index))
        d2, errors = [], []
        for k, t in enumerate(thetas):
            if t == 0.0:
                continue
            corrected, error = jackknife_hellinger(reference, sample(dists[k], 500, seed=17, spawn_key=(r, k)))
            d2.append(corrected)
            errors.append(error)
        sigma = errors if all(e > 0 for e in errors) else None
        low, high = fit_fisher(rotated, d2, sigma=sigma, n_atoms=n, degree=4).ci68
        covered += low <= exact <= high
    coverage = covered / replicas
    assert 0.60 <= coverage <= 0.76, f"ci68 covered F in {coverage:.1%} of {replicas} replicas"


def test_fit_clips_negative_curvature():
    thetas = np.arange(1, 8) * 0.1
    d2 = 0.1 - 0.05 * thetas**2
    estimate = fit_fisher(thetas, d2, degree=2)
    assert estimate.clipped and estimate.fisher == 0.0


def test_fit_needs_enough_angles():
    try:
        fit_fisher([0.1, 0.2], [0.01, 0.04], degree=3)
    except ValueError:
        return
    raise AssertionError("a cubic fit through two points was accepted")


def test_fisher_direct_matches_qfi():
    """Exact derivative and Richardson extrapolation both give F = QFI = N for a coherent state."""
    state = _css()
    exact = fisher_direct(RotationFamily(state, alpha=0.7))
    assert abs(exact - qfi(state)) < 1e-8 * N, f"exact-derivative F {exact}"
    grid = _grid(np.arange(-2, 3) * STEP)
    extrapolated = fisher_direct(grid)
    assert abs(extrapolated / N - 1.0) < 1e-4, f"Richardson F {extrapolated}"


def test_fisher_direct_rejects_coarse_grid():
    grid = _grid(np.arange(-2, 3) * 0.5)
    try:
        fisher_direct(grid)
    except DerivativeStabilityError:
        return
    raise AssertionError("a coarse grid passed the curvature check")


def test_cramer_rao_bound():
    assert abs(cramer_rao_bound(100.0, 4) - 0.05) < 1e-15
    try:
        cramer_rao_bound(0.0)
    except ValueError:
        return
    raise AssertionError("zero Fisher information was accepted")


def test_coherent_state_squeezing():
    """A coherent state has xi^2 = 1 from the state and about 1 + 1/N from histograms."""
    n = 100
    state = coherent_state(n, math.pi / 2, math.pi)
    assert abs(wineland_squeezing(state) - 1.0) < 1e-10
    by_alpha = {a: [outcome_distribution(state, a, 0.0)] for a in (0.0, 0.5, 1.0)}
    result = squeezing_from_distributions(by_alpha, n)
    assert abs(result.xi2_number - 1.0) < 1e-10, f"xi2_number {result.xi2_number}"
    assert abs(result.xi2 - (1.0 + 1.0 / n)) < 2e-3, f"xi2 {result.xi2}"


def test_spin_squeezing_validation():
    try:
        spin_squeezing([0.01], [0.0], 1.2, 100)
    except ValueError:
        pass
    else:
        raise AssertionError("visibility above 1 was accepted")
    result = spin_squeezing([0.02, 0.005], [0.0, 0.0], 1.0, 100, alphas=[0.1, 0.2])
    assert result.alpha == 0.2 and abs(result.xi2 - 0.5) < 1e-12


def test_bayesian_estimate_converges_to_fisher():
    """
    Off the equator the curvature of log P_z(theta) depends on the outcome,
    so sigma^2 varies between sequences. Its spread shrinks as 1/sqrt(m)
    while 1/(N m sigma^2) stays at F/N = 1.
    """
    n = 20
    state = coherent_state(n, math.pi / 2 + 0.7, math.pi)
    thetas = np.arange(-10, 11) * 0.005
    family = GridFamily(thetas, [outcome_distribution(state, 0.0, t) for t in thetas])
    fisher = fisher_direct(RotationFamily(state))
    assert abs(fisher / n - 1.0) < 1e-6
    sequence = sample(family.distribution(0.0), 32 * 250, seed=5).outcome_values()
    m_values = [1, 2, 4, 8, 16, 32]
    table = bayes_convergence(sequence, family, m_values, n).set_index("m")
    assert (table["n_fitted"] == table["n_sequences"]).all()

    spread_one = table.loc[1, "std"]
    assert spread_one > 0.1, f"1/(N sigma^2) barely depends on the outcome: std {spread_one}"
    for m in m_values:
        value = table.loc[m, "inverse_nm_sigma2"]
        if m >= 8:
            assert abs(value * n / fisher - 1.0) < 0.1, f"m={m}: 1/(N m sigma^2) = {value}"
        ratio = table.loc[m, "std"] * math.sqrt(m) / spread_one
        assert abs(ratio - 1.0) < 0.25, f"m={m}: spread times sqrt(m) is {ratio:.3f} of the m=1 spread"


def test_bayesian_estimate_empty_sequence():
    family = _grid(np.arange(-3, 4) * STEP, 10)
    result = bayesian_estimate([], family)
    assert not result.fitted and result.m_sequence_length == 0
    assert np.all(result.log_likelihood == 0)


def test_split_reference():
    dist = outcome_distribution(coherent_state(10, math.pi / 2, math.pi))
    reference = sample(dist, 300, seed=2)
    held, rest = split_reference(reference, holdout=100, seed=2)
    assert held.size == 100 and rest.total == 200
    assert set(np.round(held, 9)).issubset(set(np.round(dist.support, 9)))


def test_moment_sensitivity_of_coherent_state():
    """Error propagation on a coherent-state fringe gives 1/sqrt(N)."""
    thetas = np.arange(-10, 11) * STEP
    means, variances = fringe(RotationFamily(_css()), thetas)
    result = moment_sensitivity(thetas, means, variances, N, theta_star=0.0)
    assert abs(result.delta_theta * math.sqrt(N) - 1.0) < 1e-3, f"delta_theta {result.delta_theta}"
    flat = moment_sensitivity([0.0, 0.1], [0.2, 0.2], [0.01, 0.01], N)
    assert not flat.bounded and flat.to_dict()["delta_theta"] is None


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
