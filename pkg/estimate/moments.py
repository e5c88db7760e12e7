"""
Phase sensitivity from the first two moments of the fringe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from estimate.DistributionFamily import DistributionFamily


@dataclass
class MomentSensitivity:
    """Error propagation Delta theta = sqrt(Var z) / |d<z>/d theta| at theta_star"""

    delta_theta: float
    slope: float
    variance: float
    theta_star: float
    n_atoms: int

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.delta_theta)

    @property
    def standard_quantum_limit(self) -> float:
        return 1.0 / math.sqrt(self.n_atoms)

    @property
    def beats_sql(self) -> bool:
        return self.bounded and self.delta_theta < self.standard_quantum_limit

    def to_dict(self) -> Dict[str, Any]:
        return {
            "delta_theta": self.delta_theta if self.bounded else None,
            "bounded": self.bounded,
            "slope": self.slope,
            "variance": self.variance,
            "theta_star": self.theta_star,
            "standard_quantum_limit": self.standard_quantum_limit,
            "beats_sql": self.beats_sql,
        }


def fringe(family: DistributionFamily, thetas: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    """<z>(theta) and Var z(theta) over a set of angles"""
    dists = [family.distribution(t) for t in thetas]
    return np.array([d.mean() for d in dists]), np.array([d.variance() for d in dists])


def moment_sensitivity(
    thetas: Sequence[float],
    means: Sequence[float],
    variances: Sequence[float],
    n_atoms: int,
    theta_star: Optional[float] = None,
) -> MomentSensitivity:
    """
    Moment-based phase sensitivity of the fringe

    Parameters
    ----------
    thetas : sequence of float
        Rotation angles (rad), increasing
    means, variances : sequence of float
        <z> and Var z at each angle
    n_atoms : int
        Atom number, for the comparison with 1/sqrt(N)
    theta_star : float, optional
        Working point on the grid; default is the angle of best sensitivity

    Returns
    -------
    MomentSensitivity
        delta_theta is math.inf when the slope vanishes
    """
    t = np.asarray(thetas, dtype=float)
    mu = np.asarray(means, dtype=float)
    var = np.asarray(variances, dtype=float)
    if t.size < 2 or t.shape != mu.shape or t.shape != var.shape:
        raise ValueError("Need matching arrays of at least two angles")
    order = np.argsort(t)
    t, mu, var = t[order], mu[order], var[order]
    slope = np.gradient(mu, t)

    with np.errstate(divide="ignore", invalid="ignore"):
        delta = np.where(slope != 0, np.sqrt(np.clip(var, 0, None)) / np.abs(slope), np.inf)

    if theta_star is None:
        i = int(np.argmin(delta))
    else:
        hits = np.flatnonzero(np.isclose(t, theta_star, rtol=0.0, atol=1e-12))
        if hits.size == 0:
            raise ValueError(f"theta_star={theta_star} is not one of the angles")
        i = int(hits[0])

    return MomentSensitivity(
        delta_theta=float(delta[i]),
        slope=float(slope[i]),
        variance=float(var[i]),
        theta_star=float(t[i]),
        n_atoms=n_atoms,
    )
