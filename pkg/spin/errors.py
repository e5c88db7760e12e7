"""
Exception hierarchy for numerical failures.

Precondition violations raise ``ValueError`` directly; the classes below
mark computations that were well-posed but did not converge.
"""


class NumericalError(RuntimeError):
    """Base class for numerical failures (CLI exit code 2)."""


class EvolutionConvergenceError(NumericalError):
    """Step halving in the time evolution hit its limit without converging."""


class DerivativeStabilityError(NumericalError):
    """Finite-difference Fisher information is not stable under step refinement."""


class IntegrationError(NumericalError):
    """Mean-field integration failed or drifted in energy."""


class FitError(NumericalError):
    """Weighted least-squares problem is degenerate."""


class RootFindingError(NumericalError):
    """Bracketing root search for a mean-field fixed point did not converge."""
