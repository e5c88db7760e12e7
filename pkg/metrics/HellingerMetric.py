"""
Squared Hellinger distance metric.
"""

from estimate.hellinger import hellinger_squared
from measure.ProbabilityDistribution import BinnedDistribution
from metrics.MetricAdapter import MetricAdapter


class HellingerMetric(MetricAdapter):
    """
    Plug-in squared Hellinger distance 1/2 sum (sqrt(P) - sqrt(Q))^2.

    Exact on exact distributions; on samples it carries the 1/M offset.
    """

    def name(self) -> str:
        """Returns 'Hellinger'"""
        return "Hellinger"

    def compute(self, ref: BinnedDistribution, test: BinnedDistribution) -> float:
        return hellinger_squared(ref, test)
