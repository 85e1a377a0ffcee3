"""Exception types shared across the package."""


class PtoscError(Exception):
    """Base class for all package-specific errors."""


class TruncationError(PtoscError, RuntimeError):
    """Raised when a result is numerically invalidated by the Fock-space cutoff.

    Typical causes: the metric losing positivity, or a variance turning
    negative beyond roundoff. The fix is a larger cutoff or a smaller shift.
    """


class BranchError(PtoscError, ValueError):
    """Raised when theta - arg(z*) is not a multiple of pi/2.

    The antilinear involutions exist only on two phase families:
    theta = arg(z*) + k*pi (alternating-sign branch) and
    theta = arg(z*) + (k + 1/2)*pi (uniform-sign branch).
    """


class ConfigError(PtoscError, ValueError):
    """Raised on malformed CLI flags or configuration files (exit code 2)."""
