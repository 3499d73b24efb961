"""Exception hierarchy.

Everything derived from :class:`ValidationError` is a problem with the
caller's inputs; the CLI maps those to exit code 2.
"""


class ValidationError(ValueError):
    """Base class for input and invariant violations."""


class DomainError(ValidationError):
    """A value is outside the domain of a formula (non-positive price, zero cap, ...)."""


class InsufficientHistoryError(ValidationError):
    pass


class NoCostBasisError(ValidationError):
    """A sell was requested before any buy established a cost basis."""


class OversellError(ValidationError):
    def __init__(self, asset_id, requested, position):
        self.asset_id = asset_id
        self.requested = requested
        self.position = position
        self.shortfall = requested - position
        super().__init__(
            f"oversell on {asset_id}: sell {requested:g} exceeds position "
            f"{position:g} (shortfall {self.shortfall:g})"
        )


class EmptyPortfolioError(ValidationError):
    pass


class InvalidCorrelationError(ValidationError):
    """Correlations that do not form a valid (PSD) correlation structure."""


class ConfigurationError(ValidationError):
    pass


class ParseError(ValidationError):
    def __init__(self, path, line, message):
        self.path = path
        self.line = line
        super().__init__(f"{path}:{line}: {message}")
