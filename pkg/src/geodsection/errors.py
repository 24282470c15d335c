"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line front end can map
failures onto its documented exit statuses without string matching.
"""

from __future__ import annotations


class GeodSectionError(Exception):
    """Base class for all package errors."""

    exit_code = 3


# -- configuration / usage (exit 1) ---------------------------------------


class ConfigError(GeodSectionError):
    exit_code = 1


class UnsupportedSurface(ConfigError):
    """The requested operation needs a family with a closed-form return map."""


# -- expression parsing (exit 1) ------------------------------------------


class ParseError(ConfigError):
    """Base class for defining-function parse failures."""


class ExpressionSyntaxError(ParseError):
    def __init__(self, message: str, text: str, position: int):
        self.text = text
        self.position = position
        caret = " " * position + "^"
        super().__init__(f"{message} at column {position + 1}\n  {text}\n  {caret}")


class UnknownIdentifier(ParseError):
    pass


class DimensionMismatch(ParseError):
    pass


class NonSmoothFunction(ParseError):
    pass


# -- audit / verification failures (exit 2) --------------------------------


class AuditFailure(GeodSectionError):
    exit_code = 2


class IndefiniteError(AuditFailure):
    def __init__(self, message: str, point=None, eigenvalue=None, eigenvector=None):
        super().__init__(message)
        self.point = point
        self.eigenvalue = eigenvalue
        self.eigenvector = eigenvector


class NonPositiveEpsilon(AuditFailure):
    pass


# -- numerical failures (exit 3) --------------------------------------------


class DomainError(GeodSectionError, ValueError):
    """Function evaluated outside its domain (log/sqrt of negatives, x/0, ...)."""


class RegularityError(GeodSectionError):
    """Gradient norm fell below the regularity floor."""


class DegeneratePlaneError(GeodSectionError, ValueError):
    pass


class ProjectionDiverged(GeodSectionError):
    pass


class ZeroCovector(GeodSectionError):
    pass


class StepSizeUnderflow(GeodSectionError):
    pass


class MaxStepsExceeded(GeodSectionError):
    pass


class OnBindingError(GeodSectionError, ValueError):
    pass


class NotOnBinding(GeodSectionError, ValueError):
    pass


class NotOnPage(GeodSectionError, ValueError):
    pass


class NonConvergent(GeodSectionError):
    pass


class QuadratureFailure(GeodSectionError):
    def __init__(self, message: str, error_estimate: float):
        super().__init__(f"{message} (error estimate {error_estimate:.3e})")
        self.error_estimate = error_estimate


class PolePoint(GeodSectionError, ValueError):
    pass


class NormalChord(GeodSectionError, ValueError):
    pass
