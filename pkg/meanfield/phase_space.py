"""
Mean-field (N -> infinity) phase space of the two-mode Josephson Hamiltonian.

In the dimensionless time tau = Omega t and energy h = H / (N Omega / 2),

    h(z, phi) = (Lambda / 2) z^2 - sqrt(1 - z^2) cos(phi) + (delta / Omega) z

and (z, phi) form a canonical pair with

    dz/dtau = -dh/dphi,    dphi/dtau = dh/dz.

This sign choice reproduces the quantum short-time behaviour
d<Jz>/dt = -Omega <Jy> with Jy = J sqrt(1 - z^2) sin(phi).
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from spin.errors import IntegrationError, RootFindingError
from spin.Hamiltonian import HamiltonianParams

TWO_PI = 2.0 * math.pi
ENERGY_DRIFT_TOL = 1e-8
INTEGRATOR_TOL = 1e-12
# z samples per branch when scanning for sign changes
ROOT_SCAN_POINTS = 4001


@dataclass(frozen=True)
class PhasePoint:
    z: float
    phi: float

    def __post_init__(self):
        if not abs(self.z) <= 1.0:
            raise ValueError(f"|z| must be <= 1, got {self.z}")


@dataclass(frozen=True)
class ClassicalParams:
    """
    Attributes
    ----------
    lambda_ : float
        Lambda = N chi / Omega, > 0
    delta_over_omega : float
        Detuning in units of the coupling
    n_omega : float
        Energy scale N Omega / 2
    omega : float
        Coupling Omega (rad/s) converting tau to physical time
    """

    lambda_: float
    delta_over_omega: float = 0.0
    n_omega: float = 1.0
    omega: float = 1.0

    def __post_init__(self):
        if not self.lambda_ > 0:
            raise ValueError(f"lambda_ must be > 0, got {self.lambda_}")
        if not self.omega > 0:
            raise ValueError(f"omega must be > 0, got {self.omega}")

    @classmethod
    def from_hamiltonian(cls, params: HamiltonianParams) -> "ClassicalParams":
        return cls(
            lambda_=params.lambda_,
            delta_over_omega=params.delta / params.omega,
            n_omega=params.n_atoms * params.omega / 2.0,
            omega=params.omega,
        )


def _h(z, phi, params: ClassicalParams):
    return (
        0.5 * params.lambda_ * z**2
        - np.sqrt(np.clip(1.0 - z**2, 0.0, None)) * np.cos(phi)
        + params.delta_over_omega * z
    )


def _dh_dz(z, phi, params: ClassicalParams):
    return params.lambda_ * z + z * np.cos(phi) / np.sqrt(1.0 - z**2) + params.delta_over_omega


def _dh_dphi(z, phi):
    return np.sqrt(1.0 - z**2) * np.sin(phi)


def classical_energy(point: PhasePoint, params: ClassicalParams) -> float:
    """H(z, phi) = (N Omega / 2) h(z, phi)"""
    return float(params.n_omega * _h(point.z, point.phi, params))


@dataclass(frozen=True)
class FixedPoint:
    point: PhasePoint
    stable: bool
    # squared eigenvalue of the linearized flow in tau; > 0 means hyperbolic
    eigenvalue2: float

    @property
    def stability(self) -> str:
        return "stable" if self.stable else "unstable"

    def to_dict(self):
        return {"z": self.point.z, "phi": self.point.phi, "stability": self.stability}


def _jacobian(z: float, phi: float, params: ClassicalParams) -> np.ndarray:
    """Linearized flow d(dz, dphi)/dtau at a point with sin(phi) = 0"""
    h_phiphi = math.sqrt(1.0 - z * z) * math.cos(phi)
    h_zz = params.lambda_ + math.cos(phi) / (1.0 - z * z) ** 1.5
    return np.array([[0.0, -h_phiphi], [h_zz, 0.0]])


def _classify(z: float, phi: float, params: ClassicalParams) -> FixedPoint:
    jac = _jacobian(z, phi, params)
    eig2 = float(jac[0, 1] * jac[1, 0])
    return FixedPoint(PhasePoint(z, phi), stable=eig2 <= 0.0, eigenvalue2=eig2)


def _branch_roots(phi: float, params: ClassicalParams) -> List[float]:
    u = np.linspace(-math.pi / 2, math.pi / 2, ROOT_SCAN_POINTS)[1:-1]
    z = np.sin(u)
    g = _dh_dz(z, phi, params)
    roots = list(z[g == 0.0])
    for i in np.flatnonzero(np.sign(g[:-1]) * np.sign(g[1:]) < 0):
        root, info = brentq(
            _dh_dz, z[i], z[i + 1], args=(phi, params), xtol=1e-14, full_output=True, disp=False
        )
        if not info.converged:
            raise RootFindingError(
                f"Fixed-point search at phi={phi:.4f} did not converge in [{z[i]:.6f}, {z[i + 1]:.6f}]"
            )
        roots.append(float(root))
    return sorted(roots)


def fixed_points(params: ClassicalParams) -> List[FixedPoint]:
    """
    Fixed points of the mean-field flow, sorted by (phi, z)

    Fixed points satisfy sin(phi) = 0 and dh/dz = 0. Without detuning the
    roots are (0, 0), (0, pi) and for Lambda > 1 the pair
    (+-sqrt(1 - 1/Lambda^2), pi); with detuning they are found by bracketing
    on the lines phi = 0 and phi = pi.

    Raises
    ------
    RootFindingError
        If a bracketed root does not converge
    """
    if params.delta_over_omega == 0.0:
        found = [(0.0, 0.0), (0.0, math.pi)]
        if params.lambda_ > 1.0:
            z_star = math.sqrt(1.0 - 1.0 / params.lambda_**2)
            found += [(-z_star, math.pi), (z_star, math.pi)]
    else:
        found = [(z, phi) for phi in (0.0, math.pi) for z in _branch_roots(phi, params)]
    points = [_classify(z, phi, params) for z, phi in found]
    return sorted(points, key=lambda p: (p.point.phi, p.point.z))


def _saddle(params: ClassicalParams) -> FixedPoint:
    unstable = [p for p in fixed_points(params) if not p.stable]
    if not unstable:
        raise ValueError(f"No unstable fixed point for Lambda={params.lambda_}")
    # the hyperbolic point on phi = pi closest to z = 0
    return min(unstable, key=lambda p: abs(p.point.z))


def unstable_direction(params: ClassicalParams) -> Tuple[float, np.ndarray]:
    """
    Growth rate (1/s) and unit vector (dz, dphi) of the unstable manifold at
    the hyperbolic fixed point. For delta = 0 the direction is
    proportional to (1, sqrt(Lambda - 1)).
    """
    saddle = _saddle(params)
    jac = _jacobian(saddle.point.z, saddle.point.phi, params)
    w, v = np.linalg.eig(jac)
    i = int(np.argmax(w.real))
    direction = np.real(v[:, i])
    direction /= np.linalg.norm(direction)
    if direction[0] < 0:
        direction = -direction
    return float(w[i].real * params.omega), direction


@dataclass
class Trajectory:
    """Sampled mean-field path; phi is kept unwrapped"""

    t: np.ndarray
    z: np.ndarray
    phi: np.ndarray
    energy_drift: float

    @property
    def self_trapped(self) -> bool:
        """True when z keeps one sign along the whole path"""
        return bool(np.all(self.z > 0) or np.all(self.z < 0))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"t": self.t, "z": self.z, "phi": np.mod(self.phi, TWO_PI)})


def trajectory(
    start: PhasePoint,
    params: ClassicalParams,
    t_span: Tuple[float, float],
    dt_control: float,
) -> Trajectory:
    """
    Integrate the mean-field equations of motion

    Parameters
    ----------
    start : PhasePoint
        Initial (z, phi)
    params : ClassicalParams
        Lambda, detuning and the time scale 1/Omega
    t_span : tuple of float
        (t0, t1) in seconds
    dt_control : float
        Output sampling interval (s), also the largest integrator step

    Returns
    -------
    Trajectory
        Samples at t0, t0 + dt_control, ..., t1

    Raises
    ------
    IntegrationError
        If the integrator fails or the relative energy drift exceeds 1e-8
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not t1 > t0 or not dt_control > 0:
        raise ValueError(f"Need t1 > t0 and dt_control > 0, got {t_span}, {dt_control}")
    n_samples = int(math.floor((t1 - t0) / dt_control + 1e-9)) + 1
    t_eval = t0 + dt_control * np.arange(n_samples)

    if abs(start.z) >= 1.0:
        warnings.warn(f"Start z={start.z} is a pole, returning a stationary path", stacklevel=2)
        return Trajectory(
            t_eval, np.full(n_samples, start.z), np.full(n_samples, start.phi), 0.0
        )

    omega = params.omega

    def rhs(_t, y):
        z, phi = y
        return [-omega * _dh_dphi(z, phi), omega * _dh_dz(z, phi, params)]

    sol = solve_ivp(
        rhs,
        (t0, t_eval[-1]),
        [start.z, start.phi],
        method="DOP853",
        t_eval=t_eval,
        rtol=INTEGRATOR_TOL,
        atol=INTEGRATOR_TOL,
        max_step=dt_control,
    )
    if not sol.success:
        raise IntegrationError(f"Mean-field integration failed from {start}: {sol.message}")

    z, phi = sol.y
    h0 = float(_h(start.z, start.phi, params))
    drift = float(np.max(np.abs(_h(z, phi, params) - h0))) / max(abs(h0), 1.0)
    if drift > ENERGY_DRIFT_TOL:
        raise IntegrationError(
            f"Energy drift {drift:.3e} exceeds {ENERGY_DRIFT_TOL:.0e} from {start}"
        )
    return Trajectory(sol.t, z, phi, drift)


def trajectories(
    starts: Sequence[PhasePoint],
    params: ClassicalParams,
    t_span: Tuple[float, float],
    dt_control: float,
    max_workers: Optional[int] = None,
) -> List[Trajectory]:
    """Trajectories for several starting points, integrated in parallel"""
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(lambda s: trajectory(s, params, t_span, dt_control), starts))


def separatrix(params: ClassicalParams, n_phi: int = 721) -> pd.DataFrame:
    """
    Level set h(z, phi) = h(saddle) through the hyperbolic fixed point

    For each phi on a uniform grid over [0, 2 pi) the roots in z are found
    by a sign-change scan refined with brentq. The saddle itself is a double
    root and is inserted explicitly.

    Returns
    -------
    pd.DataFrame
        Columns phi, z sorted by phi then z
    """
    saddle = _saddle(params)
    h_s = float(_h(saddle.point.z, saddle.point.phi, params))

    def level(z, phi):
        return _h(z, phi, params) - h_s

    z_grid = np.linspace(-1.0, 1.0, ROOT_SCAN_POINTS)
    rows = [(saddle.point.phi, saddle.point.z)]
    for phi in np.linspace(0.0, TWO_PI, n_phi, endpoint=False):
        g = level(z_grid, phi)
        rows += [(phi, z) for z in z_grid[g == 0.0]]
        for i in np.flatnonzero(np.sign(g[:-1]) * np.sign(g[1:]) < 0):
            rows.append((phi, float(brentq(level, z_grid[i], z_grid[i + 1], args=(phi,), xtol=1e-14))))

    frame = pd.DataFrame(rows, columns=["phi", "z"]).drop_duplicates()
    return frame.sort_values(["phi", "z"], ignore_index=True)
