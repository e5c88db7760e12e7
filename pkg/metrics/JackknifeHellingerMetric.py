"""
Jackknife-corrected squared Hellinger distance metric.
"""

from typing import Any, Dict, Optional

from estimate.jackknife import JackknifeConfig, JackknifeResult, jackknife_hellinger
from measure.ProbabilityDistribution import BinnedDistribution, EmpiricalDistribution
from metrics.MetricAdapter import MetricAdapter


class JackknifeHellingerMetric(MetricAdapter):
    """
    Squared Hellinger distance between two samples with the 1/M offset
    removed by the block Jackknife.

    The standard error of the last comparison is kept for weighting fits.
    """

    def __init__(self, config: Optional[JackknifeConfig] = None):
        """
        Parameters
        ----------
        config : JackknifeConfig, optional
            Block sizes, defaults to the divisors of M up to 20
        """
        self.config = config or JackknifeConfig()
        self.last_result: Optional[JackknifeResult] = None

    def name(self) -> str:
        """Returns 'Hellinger-Jackknife'"""
        return "Hellinger-Jackknife"

    def compute(self, ref: BinnedDistribution, test: BinnedDistribution) -> float:
        if not isinstance(ref, EmpiricalDistribution) or not isinstance(test, EmpiricalDistribution):
            raise ValueError("The Jackknife needs two sampled distributions")
        self.last_result = jackknife_hellinger(ref, test, self.config)
        return self.last_result.corrected

    def uncertainty(self) -> float:
        if self.last_result is None:
            return float("nan")
        return self.last_result.std_error

    def details(self) -> Optional[Dict[str, Any]]:
        return None if self.last_result is None else self.last_result.to_dict()
