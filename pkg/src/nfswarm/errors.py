"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined."""


class RankDeficientError(DomainError):
    """The selected atoms are linearly dependent, so the gain refit is singular."""

    def __init__(self, message, atoms=()):
        super().__init__(message)
        self.atoms = tuple(atoms)


class MemoryBudgetError(DomainError):
    """A dictionary would exceed the configured memory budget."""


class ConfigError(ValueError):
    """A configuration document is malformed or contains unknown keys."""
