"""
End-to-end tests of the spinfisher command line on a small system.
"""

import json
import os
import sys
import tempfile
from pathlib import Path

import pandas as pd

project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from cli.main import THREADS_ENV, main, resolve_threads
from pipeline.RunConfig import ConfigError

SMALL_CONFIG = {
    "experiment": {
        "n_atoms": 20,
        "lambda": 1.5,
        "evolution_times_ms": [5.0, 10.0],
        "alphas_deg": [0.0, 60.0],
        "thetas_deg": [-6.0, -3.0, 0.0, 3.0, 6.0, 9.0],
    },
    "noise": {"sigma_det": 1.0, "apply": "det"},
    "sampling": {"m_reference": 400, "m_rotated": 200, "seed": 4},
    "analysis": {
        "bayes_holdout": 200,
        "bayes_m_values": [1, 5, 20],
        "mle_max_iterations": 200,
        "husimi_grid": 32,
    },
}


def _write_config(directory, data):
    path = Path(directory) / "config.json"
    path.write_text(json.dumps(data))
    return str(path)


def _simulate_and_estimate(tmp, name, threads):
    config = _write_config(tmp, SMALL_CONFIG)
    out = Path(tmp) / name
    assert main(["simulate", "--config", config, "--out", str(out), "--threads", str(threads), "--quiet"]) == 0
    assert main(["estimate", "--config", config, "--input", str(out), "--threads", str(threads), "--quiet"]) == 0
    return out


def test_simulate_and_estimate():
    with tempfile.TemporaryDirectory() as tmp:
        out = _simulate_and_estimate(tmp, "run", 1)
        histograms = sorted(out.glob("hist_*_sampled.csv"))
        assert len(histograms) == 2 * 2 * 6, f"{len(histograms)} histograms"
        assert (out / "state_t000.json").exists() and (out / "rho_t001.json").exists()

        doc = json.loads((out / "results.json").read_text())
        assert doc["n_atoms"] == 20 and doc["seed"] == 4
        groups = doc["groups"]
        assert [(g["evolution_time_ms"], round(g["alpha_deg"], 6)) for g in groups] == [
            (5.0, 0.0),
            (5.0, 60.0),
            (10.0, 0.0),
            (10.0, 60.0),
        ]
        for group in groups:
            assert group["fisher"] is not None and group["fisher"] >= 0
            assert group["ci68"][0] <= group["fisher"] <= group["ci68"][1]
            assert len(group["jackknife"]) == 5
            assert group["squeezing"]["xi2"] > 0
            assert group["tomography"]["husimi_file"] == f"husimi_t{0 if group['evolution_time_ms'] == 5.0 else 1:03d}.csv"


def test_results_are_deterministic_across_threads():
    with tempfile.TemporaryDirectory() as tmp:
        one = _simulate_and_estimate(tmp, "one", 1)
        three = _simulate_and_estimate(tmp, "three", 3)
        for path in sorted(one.glob("hist_*")):
            assert path.read_bytes() == (three / path.name).read_bytes(), f"{path.name} differs"
        assert (one / "results.json").read_bytes() == (three / "results.json").read_bytes()


def test_invalid_config_exits_1_without_output():
    with tempfile.TemporaryDirectory() as tmp:
        config = _write_config(tmp, {"experiment": {"n_atoms": 20, "colour": "blue"}})
        out = Path(tmp) / "never"
        assert main(["simulate", "--config", config, "--out", str(out), "--quiet"]) == 1
        assert not out.exists()


def test_missing_reference_exits_1():
    with tempfile.TemporaryDirectory() as tmp:
        data = json.loads(json.dumps(SMALL_CONFIG))
        data["experiment"]["thetas_deg"] = [3.0, 6.0, 9.0]
        data["experiment"]["evolution_times_ms"] = [5.0]
        config = _write_config(tmp, data)
        out = Path(tmp) / "run"
        assert main(["simulate", "--config", config, "--out", str(out), "--quiet"]) == 0
        assert main(["estimate", "--input", str(out), "--quiet"]) == 1
        assert not (out / "results.json").exists()


def test_missing_input_exits_1():
    with tempfile.TemporaryDirectory() as tmp:
        assert main(["estimate", "--input", str(Path(tmp) / "nothing"), "--quiet"]) == 1


def test_phasespace_fixed_point_counts():
    with tempfile.TemporaryDirectory() as tmp:
        above = Path(tmp) / "above"
        config = _write_config(
            tmp, {"phasespace": {"trajectories": [[0.9, 180.0]], "t_max_ms": 20.0}}
        )
        assert main(["phasespace", "--config", config, "--out", str(above), "--quiet"]) == 0
        points = pd.read_csv(above / "fixed_points.csv")
        assert list(points.columns) == ["z", "phi", "stability"]
        assert len(points) == 4 and (points["stability"] == "unstable").sum() == 1
        assert (above / "separatrix.csv").exists()
        path = pd.read_csv(above / "trajectory_000.csv")
        assert list(path.columns) == ["t", "z", "phi"] and (path["z"] > 0).all()

        below = Path(tmp) / "below"
        config = _write_config(tmp, {"phasespace": {"lambda": 0.5}})
        assert main(["phasespace", "--config", config, "--out", str(below), "--quiet"]) == 0
        assert len(pd.read_csv(below / "fixed_points.csv")) == 2
        assert not (below / "separatrix.csv").exists()


def test_scan_writes_table():
    with tempfile.TemporaryDirectory() as tmp:
        config = _write_config(
            tmp, {"experiment": {"n_atoms": 20, "evolution_times_ms": [0.0, 5.0, 10.0]}}
        )
        out = Path(tmp) / "scan"
        assert main(["scan", "--config", config, "--out", str(out), "--n-alpha", "18", "--quiet"]) == 0
        table = pd.read_csv(out / "ideal_model.csv")
        assert len(table) == 3
        assert abs(table["fisher_per_atom"][0] - 1.0) < 1e-6


def test_thread_resolution():
    saved = os.environ.pop(THREADS_ENV, None)
    try:
        assert resolve_threads(None) == 1
        os.environ[THREADS_ENV] = "3"
        assert resolve_threads(None) == 3
        assert resolve_threads(2) == 2
        os.environ[THREADS_ENV] = "many"
        try:
            resolve_threads(None)
        except ConfigError:
            pass
        else:
            raise AssertionError("a non-integer thread count was accepted")
        try:
            resolve_threads(0)
        except ConfigError:
            pass
        else:
            raise AssertionError("zero threads were accepted")
    finally:
        os.environ.pop(THREADS_ENV, None)
        if saved is not None:
            os.environ[THREADS_ENV] = saved


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
