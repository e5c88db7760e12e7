"""
Result classes for storing analysis output.
"""

from __future__ import annotations

import json
import math
from typing import Any, Dict, List, Optional

import numpy as np

# field order of one (time, alpha) group in the results document
GROUP_FIELDS = (
    "fisher",
    "fisher_per_atom",
    "ci68",
    "fit",
    "c0_predicted",
    "jackknife",
    "bayes",
    "squeezing",
    "tomography",
    "moments",
)


def to_jsonable(value: Any) -> Any:
    """Plain JSON types; non-finite floats become None"""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


class AnalysisResult:
    """
    Estimates for one (evolution time, tomography angle) group.
    """

    def __init__(self, evolution_time_ms: float, alpha: float):
        self.evolution_time_ms = evolution_time_ms
        self.alpha = alpha
        self.values: Dict[str, Any] = {name: None for name in GROUP_FIELDS}

    def set(self, name: str, value: Any) -> None:
        """
        Store one field of the group

        Parameters
        ----------
        name : str
            One of GROUP_FIELDS
        value : Any
            JSON-compatible value or object with to_dict()
        """
        if name not in GROUP_FIELDS:
            raise KeyError(f"Unknown result field {name!r}")
        self.values[name] = value.to_dict() if hasattr(value, "to_dict") else value

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "evolution_time_ms": self.evolution_time_ms,
            "alpha_deg": math.degrees(self.alpha),
        }
        for name in GROUP_FIELDS:
            out[name] = self.values[name]
        return to_jsonable(out)

    def __str__(self):
        fisher = self.values["fisher_per_atom"]
        output = f"Result for t={self.evolution_time_ms:g} ms, alpha={math.degrees(self.alpha):.1f} deg:\n"
        output += f"  F/N: {'n/a' if fisher is None else f'{fisher:.4f}'}\n"
        sq = self.values["squeezing"]
        if sq is not None:
            output += f"  xi2: {sq['xi2_db']:.2f} dB\n"
        return output

    def __repr__(self) -> str:
        return (
            f"AnalysisResult(t={self.evolution_time_ms:g} ms, "
            f"alpha={math.degrees(self.alpha):.3f} deg, fisher_per_atom={self.values['fisher_per_atom']})"
        )


def results_document(
    results: List[AnalysisResult],
    n_atoms: int,
    bin_width: float,
    seed: Optional[int],
) -> str:
    """Serialized results with a fixed key order"""
    doc = {
        "n_atoms": n_atoms,
        "bin_width": bin_width,
        "seed": seed,
        "groups": [r.to_dict() for r in results],
    }
    return json.dumps(to_jsonable(doc), indent=2, allow_nan=False) + "\n"
