"""
Distances between a reference outcome distribution and rotated ones.
"""

from abc import ABC, abstractmethod
from typing import Any, Dict, List, Optional, Sequence, Tuple

# Avoid circular import by using TYPE_CHECKING
from typing import TYPE_CHECKING
if TYPE_CHECKING:
    from measure.ProbabilityDistribution import BinnedDistribution


class MetricAdapter(ABC):
    """
    Abstract base class for distribution metrics.

    A metric compares the reference distribution (theta = 0) with the
    distribution at a rotation angle. Stateful metrics may keep details of
    the last comparison, exposed through uncertainty() and details().
    """

    @abstractmethod
    def name(self) -> str:
        """Short label used in logs and result files"""
        pass

    @abstractmethod
    def compute(self, ref: "BinnedDistribution", test: "BinnedDistribution") -> float:
        """
        Distance between two distributions on the same lattice

        Raises
        ------
        ValueError
            If the two distributions cannot be compared
        """
        pass

    def uncertainty(self) -> float:
        """Standard error of the last computed value, nan when not available"""
        return float("nan")

    def details(self) -> Optional[Dict[str, Any]]:
        return None

    def curve(
        self, ref: "BinnedDistribution", tests: Sequence["BinnedDistribution"]
    ) -> Tuple[List[float], List[float], List[Optional[Dict[str, Any]]]]:
        """
        Compare the reference with each distribution in turn

        Returns
        -------
        tuple of list
            (values, standard errors, per-comparison details), in the order of tests
        """
        values, errors, extra = [], [], []
        for test in tests:
            values.append(self.compute(ref, test))
            errors.append(self.uncertainty())
            extra.append(self.details())
        return values, errors, extra
