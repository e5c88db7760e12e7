"""
Spin squeezing from measured distributions and from states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional, Sequence

import numpy as np

from measure.ProbabilityDistribution import BinnedDistribution
from spin.DickeState import DickeState
from spin.qfi import spin_moments
from spin.SpinOperators import SpinOperators


def to_db(value: float) -> float:
    """10 log10(value)"""
    return 10.0 * math.log10(value)


@dataclass
class SqueezingResult:
    """
    Squeezing factors at the tomography angle of smallest variance.

    xi2 = xi2_number / visibility^2, xi2_number = Var(z) / (4 p (1 - p) / N).
    """

    xi2: float
    xi2_number: float
    visibility: float
    p: float
    alpha: Optional[float] = None
    xi2_by_alpha: Dict[float, float] = field(default_factory=dict)

    @property
    def xi2_db(self) -> float:
        return to_db(self.xi2)

    @property
    def xi2_number_db(self) -> float:
        return to_db(self.xi2_number)

    @property
    def inverse_xi2(self) -> float:
        return 1.0 / self.xi2

    def to_dict(self) -> Dict[str, Any]:
        return {
            "xi2": self.xi2,
            "xi2_db": self.xi2_db,
            "xi2_number": self.xi2_number,
            "xi2_number_db": self.xi2_number_db,
            "visibility": self.visibility,
            "p": self.p,
            "alpha_deg": None if self.alpha is None else math.degrees(self.alpha),
        }


def visibility_from_distribution(dist: BinnedDistribution) -> float:
    """Normalized mean spin length <sqrt(1 - z^2)>"""
    z = np.clip(dist.support, -1.0, 1.0)
    return float(np.dot(dist.probs, np.sqrt(1.0 - z**2)))


def spin_squeezing(
    variances: Sequence[float],
    means: Sequence[float],
    visibility: float,
    n_atoms: int,
    alphas: Optional[Sequence[float]] = None,
) -> SqueezingResult:
    """
    Number and spin squeezing factors, minimized over the tomography angle

    Parameters
    ----------
    variances : sequence of float
        Var(z) for each tomography angle
    means : sequence of float
        <z> for each tomography angle
    visibility : float
        Ramsey visibility V in (0, 1]
    n_atoms : int
        Atom number N
    alphas : sequence of float, optional
        Tomography angles (rad), used to label the result

    Returns
    -------
    SqueezingResult
        Values at the angle of smallest xi2

    Raises
    ------
    ValueError
        If V is outside (0, 1] or p = (<z> + 1)/2 is outside (0, 1)
    """
    if not 0.0 < visibility <= 1.0:
        raise ValueError(f"visibility must lie in (0, 1], got {visibility}")
    var = np.atleast_1d(np.asarray(variances, dtype=float))
    mu = np.atleast_1d(np.asarray(means, dtype=float))
    if var.shape != mu.shape:
        raise ValueError(f"{var.size} variances for {mu.size} means")
    p = (mu + 1.0) / 2.0
    if np.any((p <= 0.0) | (p >= 1.0)):
        raise ValueError(f"p = (<z>+1)/2 must lie in (0, 1), got {p}")

    xi2_number = n_atoms * var / (4.0 * p * (1.0 - p))
    xi2 = xi2_number / visibility**2
    best = int(np.argmin(xi2))
    labels = list(alphas) if alphas is not None else list(range(var.size))
    return SqueezingResult(
        xi2=float(xi2[best]),
        xi2_number=float(xi2_number[best]),
        visibility=visibility,
        p=float(p[best]),
        alpha=None if alphas is None else float(labels[best]),
        xi2_by_alpha={float(a): float(x) for a, x in zip(labels, xi2)},
    )


def squeezing_from_distributions(
    by_alpha: Mapping[float, Sequence[BinnedDistribution]], n_atoms: int
) -> SqueezingResult:
    """
    Squeezing from measured distributions grouped by tomography angle.

    The visibility is taken at the angle with the largest variance of z.
    xi2 at each angle is averaged over the theta settings measured there.
    """
    if not by_alpha:
        raise ValueError("No distributions given")
    alphas = sorted(by_alpha)
    mean_var = [np.mean([d.variance() for d in by_alpha[a]]) for a in alphas]
    widest = alphas[int(np.argmax(mean_var))]
    visibility = float(np.mean([visibility_from_distribution(d) for d in by_alpha[widest]]))

    xi2_avg, xi2n_avg, p_avg = [], [], []
    for a in alphas:
        per_theta = [
            spin_squeezing([d.variance()], [d.mean()], visibility, n_atoms) for d in by_alpha[a]
        ]
        xi2_avg.append(np.mean([r.xi2 for r in per_theta]))
        xi2n_avg.append(np.mean([r.xi2_number for r in per_theta]))
        p_avg.append(np.mean([r.p for r in per_theta]))

    best = int(np.argmin(xi2_avg))
    return SqueezingResult(
        xi2=float(xi2_avg[best]),
        xi2_number=float(xi2n_avg[best]),
        visibility=visibility,
        p=float(p_avg[best]),
        alpha=float(alphas[best]),
        xi2_by_alpha={float(a): float(x) for a, x in zip(alphas, xi2_avg)},
    )


def wineland_squeezing(state: DickeState, ops: Optional[SpinOperators] = None) -> float:
    """
    xi2 = N min Var(J_perp) / |<J>|^2 with the variance minimized over
    directions perpendicular to the mean spin
    """
    mean, cov = spin_moments(state, ops)
    length = float(np.linalg.norm(mean))
    if length == 0:
        raise ValueError("Mean spin vanishes, squeezing is undefined")
    n = mean / length
    helper = np.array([0.0, 0.0, 1.0]) if abs(n[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    e1 = np.cross(n, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(n, e1)
    basis = np.column_stack([e1, e2])
    var_min = float(np.linalg.eigvalsh(basis.T @ cov @ basis)[0])
    return state.n_atoms * var_min / length**2
