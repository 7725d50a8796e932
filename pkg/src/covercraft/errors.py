"""Exception types shared across the toolkit."""


class DomainError(ValueError):
    """A precondition on an operation's inputs was violated."""


class BudgetExceeded(RuntimeError):
    """A configured resource bound (factoring bit budget, lcm bound, window span) was hit."""


class CrtConflictError(ValueError):
    """Two congruences have non-coprime moduli."""


class DistinctnessError(ValueError):
    """A covering prime appears more than once where distinctness is required."""


class InsufficientPairsError(RuntimeError):
    """Too few prime pairs to give every partition class its minimum."""


class InvariantViolation(RuntimeError):
    """An internal consistency check failed; indicates corrupted inputs or a bug."""


class SchemaError(ValueError):
    """A persisted document has the wrong shape or an unsupported version."""


class VerificationFailure(RuntimeError):
    """A covering system failed re-validation; details carry the itemized report."""


class ConfigError(ValueError):
    """Run configuration is invalid; message carries itemized problems."""
