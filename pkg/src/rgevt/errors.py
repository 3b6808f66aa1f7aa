"""Exception hierarchy.

Every error carries a short machine-readable ``code`` that the command line
front end reports in its JSON error payload and maps to an exit status.
"""


class RGError(Exception):
    code = "rg-error"
    exit_status = 1


class ParameterError(RGError, ValueError):
    """A parameter lies outside its admissible domain (e.g. alpha <= 0)."""

    code = "invalid-parameter"
    exit_status = 2


class DomainError(RGError, ValueError):
    """A point lies outside the support of a map or distribution."""

    code = "domain-error"
    exit_status = 3


class ConfigurationError(RGError, ValueError):
    """Incompatible objects were combined (e.g. support/group mismatch)."""

    code = "support-mismatch"
    exit_status = 4


class UnknownIdentifierError(RGError, KeyError):
    code = "unknown-id"
    exit_status = 5

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class QuadratureError(RGError, ArithmeticError):
    """Adaptive quadrature did not reach the requested tolerance."""

    code = "quadrature-failed"
    exit_status = 6

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class ExtractionError(RGError, ArithmeticError):
    """Series coefficients could not be extracted reliably."""

    code = "extraction-failed"
    exit_status = 7

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class BasinError(RGError, ValueError):
    """A perturbation is relevant or marginal, so the law leaves the basin."""

    code = "outside-basin"
    exit_status = 8


class TruncationError(RGError, ValueError):
    """The requested order needs expansion terms that were not supplied."""

    code = "missing-term"
    exit_status = 9

    def __init__(self, message, missing_beta=None):
        super().__init__(message)
        self.missing_beta = missing_beta
