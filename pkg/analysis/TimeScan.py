"""
Ideal-model scan of the metrological figures over the evolution time.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from scipy import linalg

from estimate.fisher import optimal_alpha
from estimate.squeezing import wineland_squeezing
from measure.NoiseModel import NoiseModel
from spin.DickeState import DickeState, coherent_state
from spin.Hamiltonian import TWO_PI, HamiltonianParams, josephson_hamiltonian
from spin.qfi import qfi
from spin.SpinOperators import build_operators

SCAN_COLUMNS = [
    "time_ms",
    "alpha_opt_deg",
    "fisher_per_atom",
    "qfi_per_atom",
    "inverse_xi2",
    "fisher_per_atom_noisy",
]


class TimeScan:
    """
    Fisher information, QFI and squeezing of the state grown from the
    unstable fixed point, for constant Hamiltonian parameters.

    The Hamiltonian is diagonalized once; the state at time t is
    V exp(-i E t) V^dag psi0 with psi0 the coherent state on the -x axis.

    Args:
        n_atoms: Atom number N.
        lambda_: Lambda = N chi / Omega.
        omega: Coupling Omega (rad/s).
        delta: Detuning (rad/s).
        noise: Detection noise for the noisy Fisher column; None leaves it empty.
        which: Noise channel convolved for the noisy column.
        bin_width: Readout bin width, None for the native 2/N grid.
        n_alpha: Number of tomography angles in the coarse scan.
        verbose: Print progress.
    """

    def __init__(
        self,
        n_atoms: int = 430,
        lambda_: float = 1.5,
        omega: float = TWO_PI * 20.0,
        delta: float = 0.0,
        noise: Optional[NoiseModel] = None,
        which: str = "det",
        bin_width: Optional[float] = None,
        n_alpha: int = 180,
        verbose: bool = True,
    ):
        self.params = HamiltonianParams.from_lambda(n_atoms, lambda_, omega, delta)
        self.noise = noise
        self.which = which
        self.bin_width = bin_width
        self.n_alpha = n_alpha
        self.verbose = verbose

        self._ops = build_operators(n_atoms)
        self._energies, self._vectors = linalg.eigh(josephson_hamiltonian(self.params, self._ops))
        self._initial = coherent_state(n_atoms, math.pi / 2, math.pi)
        self._coeffs = self._vectors.conj().T @ self._initial.amplitudes

    def state_at(self, t: float) -> DickeState:
        """State after free evolution for t seconds"""
        amps = self._vectors @ (np.exp(-1j * self._energies * t) * self._coeffs)
        return DickeState.normalized(self.params.n_atoms, amps)

    def run(self, times: Sequence[float]) -> pd.DataFrame:
        """
        Evaluate the scan

        Parameters
        ----------
        times : sequence of float
            Evolution times (s)

        Returns
        -------
        pd.DataFrame
            One row per time with the columns of SCAN_COLUMNS
        """
        n = self.params.n_atoms
        times = list(times)
        if self.verbose:
            print(f"\n{'='*60}")
            print(f"Time scan: N={n}, Lambda={self.params.lambda_:g}, {len(times)} times")
            if self.noise is not None:
                print(f"  Noise: {self.which}, sigma={self.noise.sigma(self.which):g} atoms")
            print(f"{'='*60}\n")

        rows = []
        for i, t in enumerate(times, 1):
            if self.verbose:
                print(f"  [{i}/{len(times)}] t={t * 1e3:.2f} ms ... ", end="", flush=True)
            state = self.state_at(t)
            alpha, fisher = optimal_alpha(state, bin_width=self.bin_width, n_scan=self.n_alpha)
            if self.noise is not None:
                _, fisher_noisy = optimal_alpha(
                    state, self.noise, self.which, self.bin_width, n_scan=self.n_alpha
                )
                noisy = fisher_noisy / n
            else:
                noisy = math.nan
            row = {
                "time_ms": t * 1e3,
                "alpha_opt_deg": math.degrees(alpha),
                "fisher_per_atom": fisher / n,
                "qfi_per_atom": qfi(state, self._ops) / n,
                "inverse_xi2": 1.0 / wineland_squeezing(state, self._ops),
                "fisher_per_atom_noisy": noisy,
            }
            rows.append(row)
            if self.verbose:
                print(f"F/N={row['fisher_per_atom']:.2f}, 1/xi2={row['inverse_xi2']:.2f}")

        if self.verbose:
            print(f"\n{'='*60}\n")
        return pd.DataFrame(rows, columns=SCAN_COLUMNS)
