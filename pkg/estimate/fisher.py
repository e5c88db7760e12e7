"""
Direct Fisher information of a distribution family and the Cramer-Rao bound.
"""

from __future__ import annotations

import math
import warnings
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from estimate.DistributionFamily import DistributionFamily, GridFamily, RotationFamily
from measure.NoiseModel import NoiseModel
from spin.DickeState import DickeState
from spin.errors import DerivativeStabilityError

DEFAULT_STABILITY_TOL = 0.05


def _fisher_sum(probs: np.ndarray, dprobs: np.ndarray) -> float:
    mask = probs > 0
    return float(np.sum(dprobs[mask] ** 2 / probs[mask]))


def fisher_direct(
    family: DistributionFamily,
    theta0: float = 0.0,
    step: Optional[float] = None,
    stability_tol: float = DEFAULT_STABILITY_TOL,
) -> float:
    """
    Fisher information F = sum_z (dP_z/dtheta)^2 / P_z at theta0

    Families with an exact derivative are evaluated directly. Otherwise
    central differences at steps h and 2h are combined by Richardson
    extrapolation; if the extrapolated and the plain h estimate differ by
    more than stability_tol (relative), the grid is too coarse.

    Parameters
    ----------
    family : DistributionFamily
        The theta-indexed family
    theta0 : float
        Angle at which F is evaluated (rad)
    step : float, optional
        Finite-difference step, defaults to the family grid step
    stability_tol : float
        Relative tolerance of the curvature check

    Returns
    -------
    float
        F(theta0) >= 0. Bins with P_z(theta0) = 0 contribute nothing.

    Raises
    ------
    ValueError
        If no step is available or the needed angles are not on the grid
    DerivativeStabilityError
        If the curvature check fails
    """
    if family.has_derivative() and step is None:
        p = family.distribution(theta0).probs
        return _fisher_sum(p, family.derivative(theta0))

    h = step if step is not None else family.grid_step()
    if h is None or not h > 0:
        raise ValueError(f"{family.name()} provides no finite-difference step")

    def probs_at(theta: float) -> np.ndarray:
        return family.distribution(theta).probs

    def available(theta: float) -> bool:
        if isinstance(family, GridFamily):
            return family.contains(theta)
        return True

    if not (available(theta0 + h) and available(theta0 - h)):
        raise ValueError(f"Angles theta0 +/- {h:.6g} are not available in {family.name()}")

    p0 = probs_at(theta0)
    d_h = (probs_at(theta0 + h) - probs_at(theta0 - h)) / (2.0 * h)
    f_h = _fisher_sum(p0, d_h)

    if not (available(theta0 + 2 * h) and available(theta0 - 2 * h)):
        warnings.warn(
            f"{family.name()}: angles theta0 +/- 2h missing, using a plain central difference",
            stacklevel=2,
        )
        return f_h

    d_2h = (probs_at(theta0 + 2 * h) - probs_at(theta0 - 2 * h)) / (4.0 * h)
    d_rich = (4.0 * d_h - d_2h) / 3.0
    f_rich = _fisher_sum(p0, d_rich)

    if abs(f_rich - f_h) > stability_tol * max(abs(f_rich), np.finfo(float).tiny):
        raise DerivativeStabilityError(
            f"Finite-difference Fisher information unstable at theta0={theta0:.6g}: "
            f"F(h)={f_h:.6g}, F(Richardson)={f_rich:.6g}, step h={h:.3g}"
        )
    return f_rich


def cramer_rao_bound(fisher: float, m: int = 1) -> float:
    """
    Phase sensitivity 1/sqrt(m F) of an unbiased estimator from m outcomes

    Raises
    ------
    ValueError
        If fisher <= 0 or m < 1
    """
    if not fisher > 0:
        raise ValueError(f"Fisher information must be > 0, got {fisher}")
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    return 1.0 / math.sqrt(m * fisher)


def fisher_vs_alpha(
    state: DickeState,
    alphas: Sequence[float],
    noise: Optional[NoiseModel] = None,
    which: str = "det",
    bin_width: Optional[float] = None,
) -> np.ndarray:
    """Fisher information at theta=0 for each tomography angle"""
    return np.array(
        [
            fisher_direct(RotationFamily(state, a, noise=noise, which=which, bin_width=bin_width))
            for a in alphas
        ]
    )


def optimal_alpha(
    state: DickeState,
    noise: Optional[NoiseModel] = None,
    which: str = "det",
    bin_width: Optional[float] = None,
    n_scan: int = 180,
) -> Tuple[float, float]:
    """
    Tomography angle maximizing the Fisher information of the z readout.

    A coarse scan over [0, pi) is refined by a bounded scalar search
    around the best scan point.

    Returns
    -------
    tuple of float
        (alpha in [0, pi), Fisher information at alpha)
    """
    alphas = np.arange(n_scan) * (np.pi / n_scan)
    values = fisher_vs_alpha(state, alphas, noise, which, bin_width)
    best = int(np.argmax(values))
    width = np.pi / n_scan

    def objective(a: float) -> float:
        return -fisher_direct(RotationFamily(state, a, noise=noise, which=which, bin_width=bin_width))

    res = minimize_scalar(
        objective,
        bounds=(alphas[best] - width, alphas[best] + width),
        method="bounded",
        options={"xatol": 1e-6},
    )
    if res.success and -res.fun > values[best]:
        return float(np.mod(res.x, np.pi)), float(-res.fun)
    return float(alphas[best]), float(values[best])
