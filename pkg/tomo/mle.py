"""
Iterative maximum-likelihood reconstruction of the symmetric-subspace state.

Each histogram bin k of a setting (alpha, theta) is the projector
Pi_k = U^dag |m_k><m_k| U with U = R_y(theta) R_x(alpha). With
R = sum_k (f_k / p_k(rho)) Pi_k every step is the congruence

    rho <- A rho A / tr(A rho A),    A = (1 - eps) + eps R

eps = 1 is the plain R rho R update. When it raises the likelihood eps is
doubled while the likelihood keeps rising; when it lowers it eps is halved
(the diluted step) until it no longer does.

The iteration stops on the eigen-gap lambda_max(R) - 1. It is zero at the
maximum and bounds the remaining log-likelihood per outcome from above.

Small systems start from the trace-one PSD projection of the linear-inversion
estimate, larger ones from the maximally mixed state.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
from scipy.linalg import lstsq

from measure.ProbabilityDistribution import EmpiricalDistribution, ProbabilityDistribution
from spin.SpinOperators import build_operators
from tomo.DensityMatrixSym import DensityMatrixSym

DEFAULT_MAX_ITERATIONS = 5000
DEFAULT_TOL = 1e-10
MIN_DILUTION = 1e-8
MAX_RELAXATION = 64.0
# largest Hilbert-space dimension for the linear-inversion start
LEAST_SQUARES_MAX_DIM = 32
# relative slack for the monotonicity check
LIKELIHOOD_SLACK = 1e-12


@dataclass
class MLEResult:
    """
    Reconstructed state and iteration diagnostics.

    Attributes:
        rho: The reconstructed density matrix.
        log_likelihood: Log-likelihood after each iteration (index 0 is the start).
        iterations: Number of iterations performed.
        converged: True when the eigen-gap of R dropped below tol.
        stalled: True when no diluted step could raise the likelihood.
        under_determined: True when fewer than two distinct settings were given.
        gap: Final lambda_max(R) - 1.
        start: "least-squares", "mixed" or "given".
    """

    rho: DensityMatrixSym
    log_likelihood: List[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    stalled: bool = False
    under_determined: bool = False
    gap: float = math.inf
    start: str = "mixed"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "iterations": self.iterations,
            "converged": self.converged,
            "stalled": self.stalled,
            "under_determined": self.under_determined,
            "gap": self.gap,
            "start": self.start,
            "log_likelihood": self.log_likelihood[-1] if self.log_likelihood else None,
            "purity": self.rho.purity(),
        }


@dataclass
class _Projectors:
    rows: np.ndarray  # bras <m_k| U of the bins with counts
    weights: np.ndarray
    n_settings: int
    all_rows: List[np.ndarray]  # every bin of every setting
    setting_freqs: List[np.ndarray]  # normalized within the setting


def _projector_rows(histograms, n_atoms: int) -> _Projectors:
    ops = build_operators(n_atoms)
    native = 2.0 / n_atoms
    rows, weights, all_rows, setting_freqs = [], [], [], []
    settings = set()
    for hist in histograms:
        if not math.isclose(hist.bin_width, native, rel_tol=1e-9):
            raise ValueError(
                f"Tomography histograms need bin width 2/N={native:.6g}, got {hist.bin_width:.6g}"
            )
        k = np.round((hist.support + 1.0) * n_atoms / 2.0).astype(np.int64)
        weight = np.asarray(
            hist.counts if isinstance(hist, EmpiricalDistribution) else hist.probs, dtype=float
        )
        outside = (k < 0) | (k > n_atoms)
        if np.any(weight[outside] > 0):
            warnings.warn(
                f"{weight[outside].sum():g} counts beyond |z| = 1 folded into the edge bins "
                f"(alpha={hist.alpha:.4f}, theta={hist.theta:.4f})",
                stacklevel=3,
            )
        k = np.clip(k, 0, n_atoms)
        folded = np.bincount(k, weights=weight, minlength=n_atoms + 1)
        if folded.sum() <= 0:
            continue
        settings.add((round(hist.alpha, 12), round(hist.theta, 12)))

        unitary = ops.rotation_matrix(np.pi / 2, hist.theta) @ ops.rotation_matrix(0.0, hist.alpha)
        used = np.flatnonzero(folded > 0)
        rows.append(unitary[used, :])
        weights.append(folded[used])
        all_rows.append(unitary)
        setting_freqs.append(folded / folded.sum())
    if not rows:
        raise ValueError("All histograms are empty")
    return _Projectors(np.vstack(rows), np.concatenate(weights), len(settings), all_rows, setting_freqs)


def _probabilities(rows: np.ndarray, rho: np.ndarray) -> np.ndarray:
    return np.einsum("ij,jk,ik->i", rows, rho, rows.conj()).real


def _log_likelihood(weights: np.ndarray, probs: np.ndarray) -> float:
    with np.errstate(divide="ignore"):
        return float(np.dot(weights, np.log(np.clip(probs, 0.0, None))))


def _normalize(m: np.ndarray) -> np.ndarray:
    m = 0.5 * (m + m.conj().T)
    return m / np.trace(m).real


def _project_density(m: np.ndarray) -> np.ndarray:
    """Closest trace-one PSD matrix in Frobenius norm (spectrum onto the simplex)"""
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    u = w[::-1]
    partial = np.cumsum(u) - 1.0
    j = np.arange(1, u.size + 1)
    last = np.flatnonzero(u - partial / j > 0)[-1]
    w = np.clip(w - partial[last] / (last + 1), 0.0, None)
    return _normalize((v * w) @ v.conj().T)


def _least_squares_start(projectors: _Projectors, dim: int) -> np.ndarray:
    rows = np.vstack(projectors.all_rows)
    freqs = np.concatenate(projectors.setting_freqs)
    # p_k = sum_ij rho_ij r_ki conj(r_kj)
    design = (rows[:, :, None] * rows.conj()[:, None, :]).reshape(rows.shape[0], dim * dim)
    solution, *_ = lstsq(design, freqs.astype(complex))
    return _project_density(solution.reshape(dim, dim))


def _r_operator(rows: np.ndarray, freqs: np.ndarray, probs: np.ndarray) -> np.ndarray:
    ratio = np.where(probs > 0, freqs / np.where(probs > 0, probs, 1.0), 0.0)
    return rows.conj().T @ (ratio[:, None] * rows)


def mle_reconstruct(
    histograms: Sequence[Union[EmpiricalDistribution, ProbabilityDistribution]],
    n_atoms: int,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    tol: float = DEFAULT_TOL,
    initial: Optional[DensityMatrixSym] = None,
) -> MLEResult:
    """
    Maximum-likelihood density matrix from histograms on the native grid

    Parameters
    ----------
    histograms : sequence of EmpiricalDistribution
        One histogram per setting (alpha, theta), bin width 2/N. Exact
        ProbabilityDistributions are accepted as the infinite-sample limit.
    n_atoms : int
        Atom number N
    max_iterations : int
        Iteration limit
    tol : float
        Stop when lambda_max(R) - 1 falls below tol
    initial : DensityMatrixSym, optional
        Starting point. By default the projected linear-inversion estimate
        for N < 32 and the maximally mixed state otherwise.

    Returns
    -------
    MLEResult
        The reconstruction with its log-likelihood trace
    """
    if not histograms:
        raise ValueError("No histograms given")
    projectors = _projector_rows(histograms, n_atoms)
    rows = projectors.rows
    freqs = projectors.weights / projectors.weights.sum()
    under_determined = projectors.n_settings < 2
    if under_determined:
        warnings.warn(
            "Fewer than two distinct settings: off-diagonal elements are unconstrained",
            stacklevel=2,
        )

    dim = n_atoms + 1
    identity = np.eye(dim)
    mixed = DensityMatrixSym.maximally_mixed(n_atoms).matrix
    if initial is not None:
        rho, start = initial.matrix.copy(), "given"
    elif dim <= LEAST_SQUARES_MAX_DIM:
        rho, start = _least_squares_start(projectors, dim), "least-squares"
        if not math.isfinite(_log_likelihood(freqs, _probabilities(rows, rho))):
            # a bin with counts has zero probability
            rho = 0.5 * (rho + mixed)
    else:
        rho, start = mixed.copy(), "mixed"

    probs = _probabilities(rows, rho)
    log_l = _log_likelihood(freqs, probs)
    trace = [log_l]
    converged = stalled = False

    def trial(r_op: np.ndarray, eps: float):
        step = (1.0 - eps) * identity + eps * r_op
        candidate = _normalize(step @ rho @ step)
        cand_probs = _probabilities(rows, candidate)
        return candidate, cand_probs, _log_likelihood(freqs, cand_probs)

    iteration = 0
    gap = math.inf
    while True:
        r_op = _r_operator(rows, freqs, probs)
        gap = float(np.linalg.eigvalsh(r_op)[-1]) - 1.0
        if gap <= tol:
            converged = True
            break
        if iteration >= max_iterations:
            break
        iteration += 1

        floor = log_l - LIKELIHOOD_SLACK * abs(log_l)
        eps = 1.0
        candidate, cand_probs, cand_l = trial(r_op, eps)
        if cand_l >= floor:
            while eps < MAX_RELAXATION:
                further = trial(r_op, 2.0 * eps)
                if not further[2] > cand_l:
                    break
                eps *= 2.0
                candidate, cand_probs, cand_l = further
        else:
            while cand_l < floor:
                eps /= 2.0
                if eps < MIN_DILUTION:
                    stalled = True
                    break
                candidate, cand_probs, cand_l = trial(r_op, eps)

        if stalled:
            warnings.warn(
                f"Likelihood iteration stalled at step {iteration}, "
                f"log-likelihood trace tail {trace[-5:]}",
                stacklevel=2,
            )
            break

        rho, probs, log_l = candidate, cand_probs, cand_l
        trace.append(log_l)

    # clear round-off below the eigenvalue floor
    w, v = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    w = np.clip(w, 0.0, None)
    rho = _normalize((v * w) @ v.conj().T)

    return MLEResult(
        rho=DensityMatrixSym(n_atoms, rho),
        log_likelihood=trace,
        iterations=iteration,
        converged=converged,
        stalled=stalled,
        under_determined=under_determined,
        gap=gap,
        start=start,
    )
