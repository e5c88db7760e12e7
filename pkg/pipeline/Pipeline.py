"""
Simulation and analysis pipelines driven by a RunConfig.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from estimate.bayes import bayes_convergence, bayesian_estimate, split_reference
from estimate.DistributionFamily import GridFamily
from estimate.FisherFit import fit_fisher
from estimate.hellinger import bias_terms
from estimate.jackknife import JackknifeConfig
from estimate.moments import moment_sensitivity
from estimate.squeezing import squeezing_from_distributions
from measure.histogram_io import atomic_write_text, write_histogram
from measure.ProbabilityDistribution import BinnedDistribution, EmpiricalDistribution
from measure.readout import convolve_noise, outcome_distribution, rebin, sample
from metrics.HellingerMetric import HellingerMetric
from metrics.JackknifeHellingerMetric import JackknifeHellingerMetric
from pipeline.MeasurementDataset import GroupKey, MeasurementDataset
from pipeline.Result import AnalysisResult, results_document, to_jsonable
from pipeline.RunConfig import AnalysisConfig, RunConfig
from spin.evolution import prepare_and_evolve
from spin.DickeState import DickeState
from tomo.husimi import husimi
from tomo.mle import mle_reconstruct

RESULTS_FILE = "results.json"


def histogram_name(ti: int, ai: int, ki: int, kind: str) -> str:
    return f"hist_t{ti:03d}_a{ai:03d}_th{ki:03d}_{kind}.csv"


class SimulationPipeline:
    """
    Simulate the measurement sequence and write histograms per (t, alpha, theta).

    Setting (ti, ai, ki) draws from the stream addressed by spawn key
    (ti, ai, ki) under the configured seed, so adding a setting leaves the
    draws of every other setting unchanged. Distributions are computed in
    parallel; files are written from the calling thread in setting order.
    """

    def __init__(self, config: RunConfig, output_dir: Path, threads: int = 1, verbose: bool = True):
        self.config = config
        self.output_dir = Path(output_dir)
        self.threads = max(1, int(threads))
        self.verbose = verbose
        self.written: List[Path] = []

    def _state(self, evolution_time: float) -> DickeState:
        exp = self.config.experiment
        return prepare_and_evolve(
            exp.n_atoms,
            self.config.loss.loss_model(exp),
            evolution_time,
            exp.omega,
            self.config.pulses.program(),
        )

    def _setting(self, state: DickeState, evolution_time: float, index: Tuple[int, int, int]):
        ti, ai, ki = index
        exp = self.config.experiment
        loss = self.config.loss.loss_model(exp)
        background = loss.params_at(evolution_time, exp.n_atoms, exp.omega)
        exact = outcome_distribution(
            state, exp.alphas[ai], exp.thetas[ki], self.config.pulses.program(), background
        )
        noisy = convolve_noise(exact, self.config.noise.model(), which=self.config.noise.apply)
        m = self.config.sampling.m_reference if exp.thetas_deg[ki] == 0 else self.config.sampling.m_rotated
        drawn = sample(noisy, m, seed=self.config.sampling.seed, spawn_key=index)
        return noisy, drawn

    def run(self) -> List[Path]:
        """
        Execute the simulation

        Returns
        -------
        List[Path]
            Written files (histogram CSVs, sidecars and state JSONs)
        """
        exp = self.config.experiment
        sampling = self.config.sampling
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self.written = []

        n_settings = len(exp.alphas) * len(exp.thetas)
        if self.verbose:
            print(f"\n{'='*60}")
            print(f"Simulation: N={exp.n_atoms}, Lambda={exp.lambda_}, pulses={self.config.pulses.model}")
            print(f"  Evolution times: {len(exp.evolution_times)}, settings per time: {n_settings}")
            print(f"  Seed: {sampling.seed}, threads: {self.threads}")
            print(f"{'='*60}\n")

        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            for ti, (t, t_ms) in enumerate(zip(exp.evolution_times, exp.evolution_times_ms)):
                if self.verbose:
                    print(f"  [{ti + 1}/{len(exp.evolution_times)}] t={t_ms:g} ms ... ", end="", flush=True)
                state = self._state(t)
                state_path = self.output_dir / f"state_t{ti:03d}.json"
                atomic_write_text(state_path, state.to_json() + "\n")
                self.written.append(state_path)

                indices = [
                    (ti, ai, ki) for ai in range(len(exp.alphas)) for ki in range(len(exp.thetas))
                ]
                outputs = pool.map(lambda idx: self._setting(state, t, idx), indices)
                for (_, ai, ki), (noisy, drawn) in zip(indices, outputs):
                    path = self.output_dir / histogram_name(ti, ai, ki, "sampled")
                    self.written.extend(write_histogram(path, drawn, sampling.seed, t_ms))
                    if sampling.write_exact:
                        path = self.output_dir / histogram_name(ti, ai, ki, "exact")
                        self.written.extend(write_histogram(path, noisy, None, t_ms))
                if self.verbose:
                    print(f"{len(indices)} histograms")

        if self.verbose:
            print(f"\n{'='*60}")
            print(f"Simulation completed. {len(self.written)} files written to {self.output_dir}")
            print(f"{'='*60}\n")
        return self.written


class AnalysisPipeline:
    """
    Estimate Fisher information, squeezing, Bayesian sensitivity and the
    density matrix from a MeasurementDataset.

    Each (time, alpha) group needs a theta = 0 reference histogram. Groups
    with fewer rotated angles than fit parameters get no Fisher estimate.
    """

    def __init__(
        self,
        dataset: MeasurementDataset,
        analysis: Optional[AnalysisConfig] = None,
        seed: int = 0,
        output_dir: Optional[Path] = None,
        threads: int = 1,
        verbose: bool = True,
    ):
        self.dataset = dataset
        self.analysis = analysis or AnalysisConfig()
        self.seed = seed
        self.output_dir = None if output_dir is None else Path(output_dir)
        self.threads = max(1, int(threads))
        self.verbose = verbose
        self.results: List[AnalysisResult] = []
        self.bin_width = self.analysis.analysis_width(dataset.n_atoms)

    def _check_references(self) -> None:
        missing = [key for key in self.dataset if 0.0 not in self.dataset.group(key)]
        if missing:
            labels = ", ".join(f"(t={t:g} ms, alpha={math.degrees(a):.3f} deg)" for t, a in missing)
            raise ValueError(f"Missing theta=0 reference histogram for {labels}")

    def _jackknife_config(self) -> JackknifeConfig:
        return JackknifeConfig(
            block_sizes=self.analysis.jackknife_block_sizes,
            max_block_size=self.analysis.jackknife_max_block,
            seed=self.seed,
        )

    def _fisher(self, result: AnalysisResult, group: Dict[float, BinnedDistribution]) -> None:
        n_atoms = self.dataset.n_atoms
        binned = {th: rebin(d, self.bin_width) for th, d in group.items()}
        reference = binned[0.0]
        rotated = [th for th in binned if th != 0.0]
        n_params = self.analysis.fit_degree
        if len(rotated) < n_params:
            warnings.warn(
                f"t={result.evolution_time_ms:g} ms, alpha={math.degrees(result.alpha):.3f} deg: "
                f"{len(rotated)} rotated angles, need {n_params} for the fit",
                stacklevel=2,
            )
            return

        sampled = self.dataset.kind == "sampled"
        metric = JackknifeHellingerMetric(self._jackknife_config()) if sampled else HellingerMetric()
        d2, sigma, details = metric.curve(reference, [binned[th] for th in rotated])
        jackknife = {f"{math.degrees(th):.6g}": d for th, d in zip(rotated, details)}

        weighted = sampled and all(s > 0 for s in sigma)
        estimate = fit_fisher(
            rotated,
            d2,
            sigma=sigma if weighted else None,
            n_atoms=n_atoms,
            degree=self.analysis.fit_degree,
        )
        result.set("fisher", estimate.fisher)
        result.set("fisher_per_atom", estimate.fisher_per_atom)
        result.set("ci68", list(estimate.ci68))
        result.set("fit", estimate)
        result.set("jackknife", jackknife if sampled else None)

        if sampled:
            m0 = reference.total
            m1 = int(np.median([binned[th].total for th in rotated]))
            c0, _ = bias_terms(reference.occupied_bins(), m0, estimate.fisher, m_other=m1)
            result.set("c0_predicted", c0)

        thetas = sorted(binned)
        result.set(
            "moments",
            moment_sensitivity(
                thetas,
                [binned[th].mean() for th in thetas],
                [binned[th].variance() for th in thetas],
                n_atoms,
            ),
        )

        if sampled and self.analysis.bayes:
            result.set("bayes", self._bayes(binned))

    def _bayes(self, binned: Dict[float, BinnedDistribution]) -> Optional[dict]:
        reference = binned[0.0]
        holdout = self.analysis.bayes_holdout
        if not isinstance(reference, EmpiricalDistribution) or reference.total <= holdout:
            warnings.warn(f"Reference sample too small for a holdout of {holdout} draws", stacklevel=3)
            return None
        held, remaining = split_reference(reference, holdout, seed=self.seed)
        members = dict(binned)
        members[0.0] = remaining
        family = GridFamily(list(members), list(members.values()))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            full = bayesian_estimate(held, family)
        m_values = [m for m in self.analysis.bayes_m_values if m <= held.size]
        convergence = bayes_convergence(held, family, m_values, self.dataset.n_atoms)
        return {"full": full.to_dict(), "convergence": convergence.to_dict(orient="records")}

    def _squeezing(self, t_ms: float) -> Optional[dict]:
        by_alpha: Dict[float, List[BinnedDistribution]] = {}
        for key in self.dataset:
            if key[0] == t_ms:
                by_alpha[key[1]] = list(self.dataset.group(key).values())
        try:
            result = squeezing_from_distributions(by_alpha, self.dataset.n_atoms)
        except ValueError as e:
            warnings.warn(f"t={t_ms:g} ms: no squeezing estimate ({e})", stacklevel=2)
            return None
        out = result.to_dict()
        out["xi2_by_alpha_deg"] = {f"{math.degrees(a):.6g}": x for a, x in result.xi2_by_alpha.items()}
        return out

    def _tomography(self, ti: int, t_ms: float) -> Optional[dict]:
        n_atoms = self.dataset.n_atoms
        native = 2.0 / n_atoms
        histograms = [
            d
            for key in self.dataset
            if key[0] == t_ms
            for d in self.dataset.group(key).values()
            if math.isclose(d.bin_width, native, rel_tol=1e-9)
        ]
        if len({d.alpha for d in histograms}) < 2:
            return None
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            mle = mle_reconstruct(
                histograms,
                n_atoms,
                max_iterations=self.analysis.mle_max_iterations,
                tol=self.analysis.mle_tol,
            )
        for w in caught:
            if "folded into the edge bins" not in str(w.message):
                warnings.warn(w.message, w.category, stacklevel=2)
        out = mle.to_dict()
        q_map = husimi(mle.rho, self.analysis.husimi_grid)
        theta_max, phi_max = q_map.argmax()
        out["husimi_max"] = {"theta": theta_max, "phi": phi_max}
        if self.output_dir is not None:
            rho_path = self.output_dir / f"rho_t{ti:03d}.json"
            q_path = self.output_dir / f"husimi_t{ti:03d}.csv"
            atomic_write_text(rho_path, mle.rho.to_json() + "\n")
            atomic_write_text(
                q_path, q_map.to_frame().to_csv(index=False, float_format="%.10g", lineterminator="\n")
            )
            out["rho_file"] = rho_path.name
            out["husimi_file"] = q_path.name
        return out

    def _group(self, key: GroupKey) -> AnalysisResult:
        result = AnalysisResult(*key)
        self._fisher(result, self.dataset.group(key))
        return result

    def run(self) -> List[AnalysisResult]:
        """
        Execute the analysis

        For each (time, alpha) group:
        1. Rebin to the analysis width and compute Jackknife-corrected d_H^2
        2. Fit the Fisher information and predict the sampling bias c0
        3. Bayesian estimate and convergence from the held-out reference draws
        4. Moment-based sensitivity of the fringe
        Squeezing and tomography are computed once per evolution time.

        Returns
        -------
        List[AnalysisResult]
            One result per group, sorted by (time, alpha)

        Raises
        ------
        ValueError
            If a group has no theta = 0 reference
        """
        self._check_references()
        keys = self.dataset.groups
        if self.verbose:
            print(f"\n{'='*60}")
            print(f"Analysis: {self.dataset.name}, N={self.dataset.n_atoms}, kind={self.dataset.kind}")
            print(f"  Groups: {len(keys)}, bin width: {self.bin_width:.6g}")
            print(f"{'='*60}\n")

        if self.output_dir is not None:
            self.output_dir.mkdir(parents=True, exist_ok=True)

        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            self.results = list(pool.map(self._group, keys))

        for ti, t_ms in enumerate(self.dataset.evolution_times_ms):
            squeezing = self._squeezing(t_ms)
            tomography = self._tomography(ti, t_ms) if self.analysis.tomography else None
            for result in self.results:
                if result.evolution_time_ms == t_ms:
                    result.set("squeezing", squeezing)
                    result.set("tomography", tomography)

        if self.verbose:
            for i, result in enumerate(self.results, 1):
                fisher = result.values["fisher_per_atom"]
                fisher_str = "n/a" if fisher is None else f"{fisher:.4f}"
                print(
                    f"  [{i}/{len(self.results)}] t={result.evolution_time_ms:g} ms, "
                    f"alpha={math.degrees(result.alpha):.1f} deg: F/N={fisher_str}"
                )
            print(f"\n{'='*60}")
            print(f"Analysis completed. {len(self.results)} groups analyzed.")
            print(f"{'='*60}\n")
        return self.results

    def write(self, path: Optional[Path] = None) -> Path:
        """Write the results document, by default to output_dir/results.json"""
        if path is None:
            if self.output_dir is None:
                raise ValueError("No output path given")
            path = self.output_dir / RESULTS_FILE
        text = results_document(self.results, self.dataset.n_atoms, self.bin_width, self.seed)
        return atomic_write_text(path, text)

    def get_results(self) -> List[dict]:
        return [to_jsonable(r.to_dict()) for r in self.results]
