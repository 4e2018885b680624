"""Exception types shared across the package."""


class EdrpError(Exception):
    """Base class for all package-specific errors."""


class ParseError(EdrpError, ValueError):
    """Raised when an input file cannot be parsed under its declared format."""


class ValidationError(EdrpError, ValueError):
    """Raised when a structurally valid object violates a model invariant.

    The message always names the first offending field.
    """


class ConfigError(EdrpError, ValueError):
    """Raised for invalid generator / experiment / clustering parameters."""


class UnknownNodeError(EdrpError, KeyError):
    """Raised when a node id is not part of the instance."""


class MissingVariableError(EdrpError, KeyError):
    """Raised when an assignment does not cover a declared model variable."""


class PlanStructureError(EdrpError, ValueError):
    """Raised when a fleet plan cannot be expressed in the optimization model."""


class EnumerationLimitError(EdrpError, ValueError):
    """Raised when an instance exceeds the exhaustive-search size guards."""
