"""
Ideal-model scan for N=430, Lambda=1.5, Omega=2 pi 20 Hz.

Takes a few tens of seconds: 45 times, each with a coarse and refined
search over the tomography angle, with and without detection noise.
"""

import math
import sys
import warnings
from functools import lru_cache
from pathlib import Path

import numpy as np

project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from analysis.ScanAnalyzer import ScanAnalyzer
from analysis.TimeScan import SCAN_COLUMNS, TimeScan
from estimate.DistributionFamily import RotationFamily
from estimate.FisherFit import fit_fisher
from estimate.fisher import fisher_direct
from estimate.hellinger import hellinger_squared
from measure.NoiseModel import NoiseModel
from measure.readout import outcome_distribution
from pipeline.MeasurementDataset import MeasurementDataset
from pipeline.Pipeline import AnalysisPipeline
from pipeline.RunConfig import AnalysisConfig

TIMES_MS = np.arange(1.0, 46.0, 1.0)
N_ATOMS = 430


@lru_cache(maxsize=1)
def _time_scan():
    return TimeScan(
        n_atoms=N_ATOMS,
        lambda_=1.5,
        omega=2 * math.pi * 20.0,
        noise=NoiseModel(sigma_det=4.0, sigma_loss=0.0),
        which="det",
        verbose=False,
    )


@lru_cache(maxsize=1)
def _scan():
    return ScanAnalyzer(_time_scan().run(TIMES_MS * 1e-3))


def test_scan_columns():
    frame = _scan().frame
    assert list(frame.columns) == SCAN_COLUMNS
    assert len(frame) == TIMES_MS.size


def test_squeezing_maximum():
    t_max, value = _scan().max_inverse_xi2()
    assert abs(value / 18.0 - 1.0) < 0.10, f"max 1/xi2 = {value:.2f} at {t_max} ms"


def test_fisher_when_squeezing_is_lost():
    analyzer = _scan()
    t_loss = analyzer.squeezing_loss_time()
    assert t_loss is not None, "squeezing never returned to 1 within the scan"
    fisher = analyzer.fisher_at(t_loss)
    assert abs(fisher / 90.0 - 1.0) < 0.15, f"F/N = {fisher:.1f} at {t_loss:.2f} ms"


def test_fisher_saturates_qfi():
    frame = _scan().frame
    ratio = frame["fisher_per_atom"] / frame["qfi_per_atom"]
    assert (ratio > 0.95).all() and (ratio < 1.0 + 1e-4).all(), f"F/QFI range {ratio.min():.3f}..{ratio.max():.3f}"


def test_gaussian_regime_fisher_equals_inverse_squeezing():
    frame = _scan().frame
    early = frame[frame["time_ms"] <= 8.0]
    rel = (early["fisher_per_atom"] / early["inverse_xi2"] - 1.0).abs()
    assert (rel < 0.05).all(), f"largest mismatch {rel.max():.3f}"


def test_detection_noise_degrades_fisher():
    frame = _scan().frame
    assert (frame["fisher_per_atom_noisy"] < frame["fisher_per_atom"]).all()
    last = frame.iloc[-1]
    assert last["fisher_per_atom_noisy"] < 0.5 * last["fisher_per_atom"], (
        f"late-time F/N {last['fisher_per_atom']:.1f} ideal vs {last['fisher_per_atom_noisy']:.1f} noisy"
    )


def test_fisher_at_outside_scan_range():
    analyzer = _scan()
    try:
        analyzer.fisher_at(0.5)
    except ValueError:
        return
    raise AssertionError("interpolated outside the scanned times")


def _row(time_ms):
    frame = _scan().frame
    return frame[np.isclose(frame["time_ms"], time_ms)].iloc[0]


def test_fit_matches_direct_fisher_on_twisted_states():
    """Exact distances of the squeezed (15 ms) and bent (25 ms) states: the fit reproduces F within 1%."""
    for time_ms in (15.0, 25.0):
        state = _time_scan().state_at(time_ms * 1e-3)
        family = RotationFamily(state, math.radians(_row(time_ms)["alpha_opt_deg"]))
        direct = fisher_direct(family)
        # largest F theta^2 / 8 on the grid is 1/32
        thetas = np.arange(-10, 11) * (0.05 / math.sqrt(direct))
        reference = family.distribution(0.0)
        d2 = [hellinger_squared(reference, family.distribution(t)) for t in thetas]
        estimate = fit_fisher(thetas, d2, n_atoms=N_ATOMS, degree=4)
        assert abs(estimate.fisher / direct - 1.0) < 0.01, (
            f"t={time_ms} ms: fit F/N {estimate.fisher_per_atom:.2f} vs direct {direct / N_ATOMS:.2f}"
        )


def test_fisher_decreases_with_detection_noise():
    """Wider detection noise always loses information, at every time and at fixed alpha."""
    for time_ms in (5.0, 15.0, 25.0, 35.0):
        state = _time_scan().state_at(time_ms * 1e-3)
        alpha = math.radians(_row(time_ms)["alpha_opt_deg"])
        values = [fisher_direct(RotationFamily(state, alpha))]
        for sigma in (2.0, 4.0, 6.0, 12.0):
            noise = NoiseModel(sigma_det=sigma, sigma_loss=0.0)
            values.append(fisher_direct(RotationFamily(state, alpha, noise=noise, which="det")))
        steps = np.diff(values)
        assert (steps < 0).all(), f"t={time_ms} ms: F/N {np.round(np.array(values) / N_ATOMS, 3)}"


def test_pipeline_separates_moments_from_fisher_after_squeezing_loss():
    """
    Once squeezing is gone the fringe moments do no better than 1/sqrt(N),
    while the Hellinger fit of the same run still finds F/N > 1.
    """
    frame = _scan().frame
    t_max, _ = _scan().max_inverse_xi2()
    late = frame[(frame["time_ms"] > t_max) & (frame["inverse_xi2"] < 0.9)]
    assert len(late), "squeezing is never lost within the scan"
    row = late.iloc[0]
    state = _time_scan().state_at(row["time_ms"] * 1e-3)
    alpha = math.radians(row["alpha_opt_deg"])

    step = 0.05 / math.sqrt(row["fisher_per_atom"] * N_ATOMS)
    dataset = MeasurementDataset(N_ATOMS, kind="exact", name="bent")
    for k in range(-6, 7):
        dataset.add(row["time_ms"], outcome_distribution(state, alpha, k * step))
    analysis = AnalysisConfig(bin_width=2.0 / N_ATOMS, fit_degree=4, bayes=False, tomography=False)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        (result,) = AnalysisPipeline(dataset, analysis, verbose=False).run()

    moments = result.values["moments"]
    assert not moments["beats_sql"], f"moments reach delta theta {moments['delta_theta']}"
    assert moments["delta_theta"] is None or moments["delta_theta"] >= 1.0 / math.sqrt(N_ATOMS)
    assert result.values["fisher_per_atom"] > 1.0, f"F/N = {result.values['fisher_per_atom']}"


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
