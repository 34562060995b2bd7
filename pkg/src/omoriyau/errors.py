"""Exception hierarchy shared by all modules.

Every error carries a ``details`` mapping so the CLI can emit a structured
diagnostic without knowing the concrete class.
"""

from __future__ import annotations


class OmoriYauError(Exception):
    """Base class for all library errors."""

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.message = message
        self.details = details

    def as_dict(self) -> dict:
        return {"error": type(self).__name__, "message": self.message, "details": self.details}


class ExpressionSyntaxError(OmoriYauError):
    """Malformed expression string; ``offset`` is the byte offset of the problem."""


class UnknownIdentifierError(ExpressionSyntaxError):
    pass


class EvaluationError(OmoriYauError):
    """Domain error while evaluating a parsed expression (log of a nonpositive, ...)."""


class QuadratureError(OmoriYauError):
    """Adaptive refinement hit the depth limit.

    ``partial`` is the best available value and ``worst`` the subinterval with
    the largest remaining error estimate.
    """

    def __init__(self, message: str, partial: float, worst: tuple[float, float], **details):
        super().__init__(message, partial=partial, worst=list(worst), **details)
        self.partial = partial
        self.worst = worst


class RootFindingError(OmoriYauError):
    pass


class SpliceEscapesHorizon(OmoriYauError):
    pass


class NestingViolated(OmoriYauError):
    pass


class InadmissibleGrowth(OmoriYauError):
    pass


class PreconditionError(OmoriYauError):
    pass


class GateError(PreconditionError):
    """An advisory gate (declared convergence/divergence of the 1/G integral) refused the input."""


class HorizonLimitedSweep(OmoriYauError):
    pass


class ConstructionFailed(OmoriYauError):
    pass
