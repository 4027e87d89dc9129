"""Exception hierarchy shared by all flexlab modules."""


class FlexlabError(Exception):
    """Base class for every error raised by flexlab."""


class StructuralError(FlexlabError, ValueError):
    """Malformed combinatorial input (bad arity, repeated vertex in a simplex)."""


class InvalidComplexError(FlexlabError, ValueError):
    """A complex that is not an oriented pseudo-manifold was used where one is required."""

    def __init__(self, report):
        self.report = report
        super().__init__("; ".join(str(v) for v in report.violations))


class QuadFieldError(FlexlabError, ArithmeticError):
    pass


class FactorizationCapacityError(QuadFieldError):
    """Squarefree decomposition could not be certified by trial division."""


class InversionCapacityError(QuadFieldError):
    """Too many prime generators for inversion by iterated conjugation."""


class QuadParseError(FlexlabError, ValueError):
    def __init__(self, message, text, position):
        self.text = text
        self.position = position
        super().__init__(f"{message} at position {position} in {text!r}")


class CurveError(FlexlabError, ValueError):
    """Point off the curve or invalid curve parameters."""


class GeometryError(FlexlabError, ValueError):
    """Degenerate geometric data or a violation of the space-form model."""


class DomainError(FlexlabError, ValueError):
    """Parameter outside the open interval where the flexion is defined."""


class ConditionError(FlexlabError, ValueError):
    """Violation of one of the suspension conditions (A)-(D).

    ``condition`` is the letter of the failed check, ``j`` the row index
    (1-based) when applicable, and ``points`` the offending curve points.
    """

    def __init__(self, condition, message, j=None, points=()):
        self.condition = condition
        self.j = j
        self.points = tuple(points)
        where = f" (j = {j})" if j is not None else ""
        super().__init__(f"condition ({condition}) failed{where}: {message}")


class ClosureError(FlexlabError, ValueError):
    """The product of the parabola signs is not 1, so no consistent pole signs exist."""


class ConsistencyError(FlexlabError, ValueError):
    """The Vieta relation for c/a holds for neither sign."""


class BranchJumpError(FlexlabError, RuntimeError):
    """Continuous-branch tracking saw a jump larger than pi/2 between adjacent samples."""

    def __init__(self, message, t=None):
        self.t = t
        super().__init__(message)


class NotAFlexionError(FlexlabError, ValueError):
    """Edge lengths are not constant along a supposed flexion path."""


class InputError(FlexlabError, ValueError):
    """Unreadable or malformed input file; the message carries the location."""
