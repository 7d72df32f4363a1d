"""Exception types shared across the package.

The CLI maps these onto its exit-code contract (see ``cli.EXIT_CODES``).
"""


class LssError(Exception):
    """Base class for all package errors."""


class InvalidInput(LssError, ValueError):
    """Malformed or out-of-domain input."""


class NumericOverflow(LssError, ArithmeticError):
    """A computation left the range of finite doubles."""


class InsufficientData(LssError, ValueError):
    """Too few usable points for a regression."""


class BudgetExceeded(LssError):
    """An enumeration would exceed its product budget.

    ``achieved`` holds the largest exact length reached (or reachable) and
    ``partial`` whatever partial result the raising operation could assemble.
    """

    def __init__(self, message, achieved=0, partial=None):
        super().__init__(message)
        self.achieved = achieved
        self.partial = partial


class HypothesesUnmet(LssError):
    """A block fails the dominant-product hypotheses of the classifier."""

    def __init__(self, message, block=None, reason=None):
        super().__init__(message)
        self.block = block
        self.reason = reason


class DominanceUncertified(HypothesesUnmet):
    """The finite-horizon dominance check found violating products."""

    def __init__(self, message, block=None, certificate=None):
        super().__init__(message, block=block, reason="dominance-uncertified")
        self.certificate = certificate
