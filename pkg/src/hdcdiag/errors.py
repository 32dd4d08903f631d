"""Exception types shared across the toolkit."""


class ValidationError(ValueError):
    """Bad input to an operation: wrong shape, out-of-range value, bad config."""


class TrainingDivergedError(RuntimeError):
    """Raised when a training loss becomes non-finite."""
