"""Error types shared across the package."""


class InvalidConfigError(ValueError):
    """A run or experiment configuration violates its invariants."""


class ContractViolationError(ValueError):
    """A caller broke an operation's precondition."""


class SizeLimitError(ValueError):
    """An exact-enumeration routine was asked for more than it can enumerate."""


class InvalidInputError(ValueError):
    """Malformed data handed to a computation (bad samples, bad p-values, ...)."""


class ChecksumMismatchError(RuntimeError):
    """Prior output on disk does not match its recorded checksum."""
