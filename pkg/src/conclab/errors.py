"""Exception types shared across the package."""


class ConclabError(Exception):
    """Base class for all errors raised by conclab."""


class DomainError(ConclabError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigurationError(ConclabError, ValueError):
    """A required parameter is missing or an option is not recognised."""
