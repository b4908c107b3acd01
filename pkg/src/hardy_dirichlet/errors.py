"""Exception types shared across the package."""


class HardyDirichletError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(HardyDirichletError, ValueError):
    """An argument lies outside the domain of an operation."""


class ConfigurationError(HardyDirichletError, ValueError):
    """A specification or configuration is incomplete or inconsistent."""


class ResourceError(HardyDirichletError, RuntimeError):
    """A size guard tripped or an allocation failed."""
