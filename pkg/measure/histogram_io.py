"""
CSV histogram files with JSON metadata sidecars.

A sampled histogram is written as ``z,count``, an exact distribution as
``z,probability``. The sidecar next to ``name.csv`` is ``name.json``.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
import pandas as pd

from measure.ProbabilityDistribution import EmpiricalDistribution, ProbabilityDistribution

Z_FORMAT = "%.12g"


def atomic_write_text(path: Union[str, Path], text: str) -> Path:
    """Write text to a temporary file in the target directory, then rename it into place"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def histogram_frame(dist: Union[ProbabilityDistribution, EmpiricalDistribution]) -> pd.DataFrame:
    """Table with columns z,count or z,probability"""
    if isinstance(dist, EmpiricalDistribution):
        return pd.DataFrame({"z": dist.support, "count": dist.counts})
    return pd.DataFrame({"z": dist.support, "probability": dist.probs})


def histogram_metadata(
    dist: Union[ProbabilityDistribution, EmpiricalDistribution],
    seed: Optional[int] = None,
    evolution_time_ms: Optional[float] = None,
) -> Dict[str, Any]:
    kind = "sampled" if isinstance(dist, EmpiricalDistribution) else "exact"
    return {
        "n_atoms": dist.n_atoms,
        "alpha_deg": math.degrees(dist.alpha),
        "theta_deg": math.degrees(dist.theta),
        "bin_width": dist.bin_width,
        "seed": seed,
        "evolution_time_ms": evolution_time_ms,
        "kind": kind,
    }


def write_histogram(
    path: Union[str, Path],
    dist: Union[ProbabilityDistribution, EmpiricalDistribution],
    seed: Optional[int] = None,
    evolution_time_ms: Optional[float] = None,
) -> Tuple[Path, Path]:
    """
    Write a histogram CSV and its JSON sidecar

    Returns
    -------
    tuple of Path
        (csv path, sidecar path)
    """
    path = Path(path)
    csv_text = histogram_frame(dist).to_csv(index=False, float_format=Z_FORMAT, lineterminator="\n")
    meta = histogram_metadata(dist, seed, evolution_time_ms)
    sidecar = path.with_suffix(".json")
    atomic_write_text(path, csv_text)
    atomic_write_text(sidecar, json.dumps(meta, indent=2) + "\n")
    return path, sidecar


def read_histogram(
    path: Union[str, Path],
) -> Tuple[Union[ProbabilityDistribution, EmpiricalDistribution], Dict[str, Any]]:
    """
    Read a histogram CSV and its sidecar

    Returns
    -------
    tuple
        (distribution, metadata dict)

    Raises
    ------
    ValueError
        If the header is neither z,count nor z,probability or the sidecar is missing
    """
    path = Path(path)
    sidecar = path.with_suffix(".json")
    if not sidecar.exists():
        raise ValueError(f"Missing metadata sidecar {sidecar}")
    with open(sidecar, "r", encoding="utf-8") as f:
        meta = json.load(f)

    frame = pd.read_csv(path)
    columns = list(frame.columns)
    n_atoms = meta.get("n_atoms")
    bin_width = float(meta["bin_width"])
    alpha = math.radians(float(meta.get("alpha_deg", 0.0)))
    theta = math.radians(float(meta.get("theta_deg", 0.0)))
    support = frame["z"].to_numpy(dtype=float)
    # rows written with a short float format; restore the exact lattice
    support = support[0] + np.arange(support.size) * bin_width

    if columns == ["z", "count"]:
        dist = EmpiricalDistribution(
            support, frame["count"].to_numpy(), bin_width, alpha, theta, n_atoms
        )
    elif columns == ["z", "probability"]:
        probs = frame["probability"].to_numpy(dtype=float)
        dist = ProbabilityDistribution(support, probs / probs.sum(), bin_width, alpha, theta, n_atoms)
    else:
        raise ValueError(f"Unrecognized histogram header {columns} in {path}")
    return dist, meta
