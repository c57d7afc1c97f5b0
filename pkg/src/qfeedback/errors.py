"""Exception hierarchy for the feedback-control simulator.

Every error raised by this package derives from :class:`QFeedbackError`, so
callers (notably the CLI) can map failures onto exit codes in one place.
"""


class QFeedbackError(Exception):
    """Base class for all package errors."""


class NotHermitianError(QFeedbackError):
    """Matrix expected to be Hermitian is not, beyond tolerance."""


class NoConvergenceError(QFeedbackError):
    """Iterative eigensolver hit its sweep cap before converging."""


class DomainError(QFeedbackError):
    """Scalar function undefined at an eigenvalue of its matrix argument."""


class DimensionMismatchError(QFeedbackError):
    """Operands have incompatible dimensions."""


class NonPositiveTemperatureError(QFeedbackError):
    """Thermal construction requires T > 0."""


class InvalidStateError(QFeedbackError):
    """Matrix is not a valid density matrix (Hermitian, unit trace, PSD)."""


class NotADistributionError(QFeedbackError):
    """Vector is not a probability distribution within tolerance."""


class InvalidModelError(QFeedbackError):
    """Measurement model fails completeness or positivity requirements."""


class IncompleteModelError(InvalidModelError):
    """Operator family does not resolve the identity, so it cannot be dilated."""


class DegenerateStateError(QFeedbackError):
    """Entire population spectrum sits below the clamping floor."""


class PlanMismatchError(QFeedbackError):
    """Executing a feedback plan did not land on the promised thermal state."""


class NonUnitaryBlockError(QFeedbackError):
    """A controlled-unitary block is not unitary within tolerance."""


class BranchMismatchError(QFeedbackError):
    """Per-branch endpoints disagree where the protocol requires identity."""


class UnknownParameterError(QFeedbackError):
    """Sweep parameter path does not name a numeric config field."""


class ConfigError(QFeedbackError):
    """Problem with a scenario config; carries the offending field path."""

    def __init__(self, path: str, message: str):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}" if path else message)


class ParseError(ConfigError):
    """Config text could not be parsed at all."""


class ValidationError(ConfigError):
    """Config parsed but a field failed validation."""


class IoError(QFeedbackError):
    """Reading or writing a ledger/report destination failed."""
