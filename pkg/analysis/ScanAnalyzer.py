"""
ScanAnalyzer for reading off figures of merit and plotting time scans.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
import pandas as pd

from analysis.TimeScan import SCAN_COLUMNS
from measure.histogram_io import atomic_write_text


class ScanAnalyzer:
    """
    Analyzes the table produced by TimeScan.run.

    This class handles:
    - Locating the squeezing maximum and the time squeezing is lost
    - Interpolating the Fisher information at a given time
    - Writing the table and plotting the curves
    """

    def __init__(self, frame: pd.DataFrame):
        missing = [c for c in SCAN_COLUMNS if c not in frame.columns]
        if missing:
            raise ValueError(f"Scan table lacks columns {missing}")
        self.frame = frame.sort_values("time_ms", ignore_index=True)

    def max_inverse_xi2(self) -> Tuple[float, float]:
        """(time_ms, 1/xi2) at the squeezing maximum"""
        i = int(self.frame["inverse_xi2"].idxmax())
        return float(self.frame.at[i, "time_ms"]), float(self.frame.at[i, "inverse_xi2"])

    def squeezing_loss_time(self) -> Optional[float]:
        """
        First time after the squeezing maximum where 1/xi2 falls back to 1

        Linear interpolation between scan points; None if it never does.
        """
        t = self.frame["time_ms"].to_numpy()
        y = self.frame["inverse_xi2"].to_numpy()
        start = int(np.argmax(y))
        for i in range(start, y.size - 1):
            if y[i] > 1.0 >= y[i + 1]:
                return float(t[i] + (y[i] - 1.0) * (t[i + 1] - t[i]) / (y[i] - y[i + 1]))
        return None

    def fisher_at(self, time_ms: float, column: str = "fisher_per_atom") -> float:
        """Linearly interpolated column value at time_ms"""
        t = self.frame["time_ms"].to_numpy()
        if not t[0] <= time_ms <= t[-1]:
            raise ValueError(f"time {time_ms} ms outside the scan range [{t[0]}, {t[-1]}]")
        return float(np.interp(time_ms, t, self.frame[column].to_numpy()))

    def write(self, path: Union[str, Path]) -> Path:
        text = self.frame.to_csv(index=False, float_format="%.10g", lineterminator="\n")
        return atomic_write_text(path, text)

    def plot(self, save_path: Optional[str] = None):
        """
        Plot F/N, QFI/N and 1/xi2 against time

        Parameters
        ----------
        save_path : str, optional
            Path to save the plot. If None, displays the plot.
        """
        try:
            import matplotlib.pyplot as plt
        except ImportError:
            raise ImportError("matplotlib is required for this method")

        f = self.frame
        plt.figure(figsize=(8, 5))
        plt.plot(f["time_ms"], f["qfi_per_atom"], "k:", label="QFI/N")
        plt.plot(f["time_ms"], f["fisher_per_atom"], "r--", label="F/N")
        plt.plot(f["time_ms"], f["inverse_xi2"], "b--", label=r"$1/\xi^2$")
        if f["fisher_per_atom_noisy"].notna().any():
            plt.plot(f["time_ms"], f["fisher_per_atom_noisy"], "r-", label="F/N (noisy)")
        plt.axhline(1.0, color="gray", lw=0.8)
        plt.yscale("log")
        plt.xlabel("evolution time (ms)")
        plt.legend()
        plt.tight_layout()

        if save_path:
            plt.savefig(save_path, dpi=300, bbox_inches="tight")
            print(f"Plot saved to {save_path}")
        else:
            plt.show()

        plt.close()
