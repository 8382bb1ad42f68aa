"""Error types shared across the package.

Validation-style failures subclass ValueError so callers that do not care
about the fine distinction can catch one base. Protocol misuse is a
RuntimeError: it signals a bug in the calling code, not bad data.
"""


class ConfigError(ValueError):
    """Rejected game or experiment configuration."""


class InvalidActionError(ValueError):
    """Site set empty or referencing sites outside the instance."""


class InvalidDistributionError(ValueError):
    """Probability vector with negative mass or total not equal to one."""


class ContractViolationError(ValueError):
    """Caller broke a documented precondition (gradient range, simplex)."""


class NumericError(ArithmeticError):
    """Arithmetic produced a non-finite or degenerate intermediate."""


class ProtocolError(RuntimeError):
    """play/update called out of order on a learner."""


class CapExceededError(ValueError):
    """Brute-force oracle asked to enumerate beyond its hard cap."""


class TraceFormatError(ValueError):
    """Malformed trace file; message carries the 1-based line number."""
