"""
Fisher information from the curvature of the squared Hellinger distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from spin.errors import FitError

FIT_DEGREES = (2, 3, 4)


@dataclass
class FisherEstimate:
    """
    Result of a Fisher information estimate.

    Attributes:
        fisher: Fisher information F >= 0.
        fisher_prime: Cubic coefficient F' (0 when the fit has no cubic term).
        fisher_per_atom: F / N, None when N is unknown.
        ci68: 68% confidence interval (low, high) for F.
        coefficients: Fitted coefficients keyed by name.
        covariance: Covariance matrix of the fitted coefficients.
        offset: Fitted offset c.
        method: "exact" or "hellinger-fit".
        clipped: True when a negative curvature was projected to F = 0.
        n_points: Number of points entering the fit.
    """

    fisher: float
    fisher_prime: float = 0.0
    fisher_per_atom: Optional[float] = None
    ci68: Tuple[float, float] = (0.0, 0.0)
    coefficients: Dict[str, float] = field(default_factory=dict)
    covariance: Optional[np.ndarray] = None
    offset: float = 0.0
    method: str = "hellinger-fit"
    clipped: bool = False
    n_points: int = 0

    @property
    def separable_bound_exceeded(self) -> Optional[bool]:
        """F/N > 1 certifies metrologically useful entanglement"""
        if self.fisher_per_atom is None:
            return None
        return self.fisher_per_atom > 1.0

    def to_dict(self) -> Dict[str, Any]:
        cov = None if self.covariance is None else np.asarray(self.covariance).tolist()
        return {
            "fisher": self.fisher,
            "fisher_prime": self.fisher_prime,
            "fisher_per_atom": self.fisher_per_atom,
            "ci68": list(self.ci68),
            "coefficients": dict(self.coefficients),
            "covariance": cov,
            "offset": self.offset,
            "method": self.method,
            "clipped": self.clipped,
            "n_points": self.n_points,
            "entangled": self.separable_bound_exceeded,
        }


def _design_matrix(x: np.ndarray, degree: int) -> Tuple[np.ndarray, Tuple[str, ...]]:
    columns = [np.ones_like(x), x**2 / 8.0]
    names = ["offset", "fisher"]
    if degree >= 3:
        columns.append(x**3 / 16.0)
        names.append("fisher_prime")
    if degree >= 4:
        columns.append(x**4)
        names.append("quartic")
    return np.column_stack(columns), tuple(names)


def exact_estimate(fisher: float, n_atoms: Optional[int] = None) -> FisherEstimate:
    """FisherEstimate wrapping an exactly computed F"""
    return FisherEstimate(
        fisher=fisher,
        fisher_per_atom=None if n_atoms is None else fisher / n_atoms,
        ci68=(fisher, fisher),
        method="exact",
    )


def fit_fisher(
    thetas: Sequence[float],
    d2: Sequence[float],
    sigma: Optional[Sequence[float]] = None,
    n_atoms: Optional[int] = None,
    degree: int = 3,
    reference_theta: float = 0.0,
    include_reference: bool = False,
) -> FisherEstimate:
    """
    Weighted least-squares fit of d_H^2(theta) = c + (F/8) x^2 + (F'/16) x^3 [+ q x^4]

    x = theta - reference_theta. The point at the reference angle is dropped
    unless include_reference is set, since comparing the reference sample
    with itself gives 0 exactly.

    Parameters
    ----------
    thetas : sequence of float
        Rotation angles (rad)
    d2 : sequence of float
        Squared Hellinger distances to the reference distribution
    sigma : sequence of float, optional
        Standard errors of d2; None for an unweighted fit with the
        covariance scaled by the residual variance
    n_atoms : int, optional
        Atom number for F/N
    degree : int
        2 (quadratic), 3 (with F', default) or 4 (with a quartic term)
    reference_theta : float
        Angle of the reference distribution (rad)
    include_reference : bool
        Keep the point at the reference angle (independent reference sample)

    Returns
    -------
    FisherEstimate
        F clipped at 0 (flagged), ci68 = F +/- sigma_F with the lower end at >= 0

    Raises
    ------
    ValueError
        On malformed input or too few points
    FitError
        If all weights vanish or the normal equations are not positive definite
    """
    if degree not in FIT_DEGREES:
        raise ValueError(f"degree must be one of {FIT_DEGREES}, got {degree}")
    theta = np.asarray(thetas, dtype=float)
    y = np.asarray(d2, dtype=float)
    if theta.shape != y.shape:
        raise ValueError(f"{theta.size} angles for {y.size} distances")
    weights = np.ones_like(y) if sigma is None else np.asarray(sigma, dtype=float)
    if weights.shape != y.shape:
        raise ValueError(f"{weights.size} errors for {y.size} distances")
    if sigma is not None:
        if np.any(~(weights > 0)):
            raise ValueError("sigma must be > 0 for every point")
        weights = 1.0 / weights**2

    x = theta - reference_theta
    keep = np.ones_like(x, dtype=bool) if include_reference else ~np.isclose(x, 0.0, atol=1e-12)
    x, y, weights = x[keep], y[keep], weights[keep]

    a, names = _design_matrix(x, degree)
    n_points, n_params = a.shape
    if n_points < n_params or np.unique(x).size < n_params:
        raise ValueError(f"Need at least {n_params} distinct angles for a degree-{degree} fit, got {np.unique(x).size}")
    if not np.any(weights > 0):
        raise FitError("All fit weights are zero")

    # columns span many decades for small angles
    sqrt_w = np.sqrt(weights)
    scale_cols = np.sqrt(np.sum(weights[:, None] * a**2, axis=0))
    if np.any(scale_cols == 0):
        raise FitError("A fit column vanishes on all weighted points")
    a_w = sqrt_w[:, None] * a / scale_cols
    normal = a_w.T @ a_w
    try:
        chol = np.linalg.cholesky(normal)
    except np.linalg.LinAlgError as e:
        raise FitError(f"Normal equations are not positive definite: {e}") from e
    scaled, *_ = np.linalg.lstsq(a_w, sqrt_w * y, rcond=None)
    coeffs = scaled / scale_cols
    inv_chol = np.linalg.inv(chol)
    covariance = (inv_chol.T @ inv_chol) / np.outer(scale_cols, scale_cols)

    if sigma is None:
        dof = n_points - n_params
        residuals = y - a @ coeffs
        scale = float(residuals @ residuals) / dof if dof > 0 else 0.0
        covariance = covariance * scale

    fisher = float(coeffs[1])
    clipped = fisher < 0
    if clipped:
        fisher = 0.0
    sigma_f = math.sqrt(max(float(covariance[1, 1]), 0.0))

    return FisherEstimate(
        fisher=fisher,
        fisher_prime=float(coeffs[2]) if degree >= 3 else 0.0,
        fisher_per_atom=None if n_atoms is None else fisher / n_atoms,
        ci68=(max(0.0, fisher - sigma_f), fisher + sigma_f),
        coefficients={k: float(v) for k, v in zip(names, coeffs)},
        covariance=covariance,
        offset=float(coeffs[0]),
        method="hellinger-fit",
        clipped=clipped,
        n_points=n_points,
    )
