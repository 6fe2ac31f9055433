"""Exception types shared across the package.

Two broad families matter to callers: configuration problems (bad
dimensions, malformed matrices, ill-posed processes) and numerical
failures (non-convergence, consistency checks that should never trip).
The command line maps the first family to exit code 1 and the second
to exit code 2.
"""


class EvorateError(Exception):
    """Base class for all package errors."""


class ValidationError(EvorateError, ValueError):
    """Invalid input: dimensions, parameter ranges, malformed documents."""


class IllDefinedIncentiveError(ValidationError):
    """The incentive assigns no reproductive weight at some state."""


class ReducibleChainError(EvorateError):
    """The chain has no unique stationary distribution."""


class NotReversibleError(EvorateError):
    """Detailed balance fails for a chain assumed reversible."""


class ConvergenceError(EvorateError):
    """An iterative solver exhausted its iteration budget."""


class NumericalConsistencyError(EvorateError):
    """An internal consistency check failed; indicates a numerical problem."""
