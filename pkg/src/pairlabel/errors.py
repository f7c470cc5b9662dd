"""Exception hierarchy shared across the toolkit."""


class PairlabelError(Exception):
    """Base class for all toolkit errors."""


class ArgumentError(PairlabelError, ValueError):
    """An argument violates a documented precondition."""


class ParseError(PairlabelError, ValueError):
    """Malformed input text (ARFF, XML, CSV)."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SchemaError(PairlabelError, ValueError):
    """Structurally valid input that does not match the expected schema."""


class DomainValueError(PairlabelError, ValueError):
    """A parsed value lies outside its permitted domain (e.g. a non-binary label)."""


class GenerationError(PairlabelError, RuntimeError):
    """Synthetic data generation exhausted its retry budget."""


class StatsError(PairlabelError, ValueError):
    """Dataset characteristics are undefined (e.g. a label never occurs)."""


class EstimationError(PairlabelError, RuntimeError):
    """A local estimate could not be formed (e.g. empty fuzzy neighborhood)."""


class InsufficientDataError(PairlabelError, ValueError):
    """Too few observations for a statistical test."""


class UndefinedMetricError(PairlabelError, ValueError):
    """A metric is undefined for every instance of the input."""


class UndefinedCorrelationError(PairlabelError, ValueError):
    """Correlation is undefined (constant input)."""
