"""Exception types shared across the package.

The CLI maps ConfigError to exit code 2 and DomainError to exit code 3.
"""


class ConfigError(ValueError):
    """Invalid configuration: bad flags, malformed files, unknown keys."""


class DomainError(ValueError):
    """Numerically well-formed input outside an operation's mathematical domain."""


class BudgetError(DomainError):
    """A work estimate exceeds the operation's stated budget."""
