"""
Histograms of one measurement campaign, grouped by evolution time and tomography angle.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple, Union

from measure.histogram_io import read_histogram
from measure.ProbabilityDistribution import BinnedDistribution

GroupKey = Tuple[float, float]
HISTOGRAM_KINDS = ("sampled", "exact")


class MeasurementDataset:
    """
    Histograms keyed by (evolution_time_ms, alpha) and then by theta.

    Attributes
    ----------
    n_atoms : int
        Atom number shared by every histogram
    kind : str
        "sampled" or "exact"
    """

    def __init__(self, n_atoms: int, kind: str = "sampled", name: Optional[str] = None):
        if kind not in HISTOGRAM_KINDS:
            raise ValueError(f"kind must be one of {HISTOGRAM_KINDS}, got {kind!r}")
        self.n_atoms = n_atoms
        self.kind = kind
        self.name = name or "unnamed"
        self._groups: Dict[GroupKey, Dict[float, BinnedDistribution]] = {}

    def add(self, evolution_time_ms: float, dist: BinnedDistribution) -> None:
        if dist.n_atoms is not None and dist.n_atoms != self.n_atoms:
            raise ValueError(f"Histogram has N={dist.n_atoms}, dataset has N={self.n_atoms}")
        key = (float(evolution_time_ms), float(dist.alpha))
        group = self._groups.setdefault(key, {})
        if dist.theta in group:
            raise ValueError(
                f"Duplicate histogram at t={evolution_time_ms} ms, "
                f"alpha={math.degrees(dist.alpha):.3f} deg, theta={math.degrees(dist.theta):.3f} deg"
            )
        group[float(dist.theta)] = dist

    @property
    def groups(self) -> List[GroupKey]:
        return sorted(self._groups)

    @property
    def evolution_times_ms(self) -> List[float]:
        return sorted({t for t, _ in self._groups})

    def group(self, key: GroupKey) -> Dict[float, BinnedDistribution]:
        """Histograms of one (time, alpha) group keyed by theta, in increasing theta"""
        return dict(sorted(self._groups[key].items()))

    def at_theta(self, evolution_time_ms: float, theta: float = 0.0) -> Dict[float, BinnedDistribution]:
        """Histograms at a given theta for every alpha of one evolution time"""
        out = {}
        for (t, alpha), group in sorted(self._groups.items()):
            if t != evolution_time_ms:
                continue
            for th, dist in group.items():
                if math.isclose(th, theta, abs_tol=1e-12):
                    out[alpha] = dist
        return out

    def __iter__(self) -> Iterator[GroupKey]:
        return iter(self.groups)

    def __len__(self) -> int:
        return sum(len(g) for g in self._groups.values())

    @classmethod
    def from_directory(cls, directory: Union[str, Path], kind: str = "sampled") -> "MeasurementDataset":
        """
        Load every histogram CSV of the given kind that has a JSON sidecar

        Raises
        ------
        FileNotFoundError
            If the directory does not exist
        ValueError
            If no histogram of the requested kind is found or atom numbers differ
        """
        directory = Path(directory)
        if not directory.is_dir():
            raise FileNotFoundError(f"Input directory {directory} does not exist")
        dataset = None
        for csv_path in sorted(directory.glob("*.csv")):
            if not csv_path.with_suffix(".json").exists():
                continue
            dist, meta = read_histogram(csv_path)
            if meta.get("kind") != kind:
                continue
            if dataset is None:
                dataset = cls(int(meta["n_atoms"]), kind=kind, name=directory.name)
            t_ms = meta.get("evolution_time_ms")
            dataset.add(0.0 if t_ms is None else float(t_ms), dist)
        if dataset is None:
            raise ValueError(f"No {kind} histograms with sidecars in {directory}")
        return dataset

    def __repr__(self) -> str:
        return (
            f"MeasurementDataset(name='{self.name}', n_atoms={self.n_atoms}, kind='{self.kind}', "
            f"groups={len(self._groups)}, histograms={len(self)})"
        )
