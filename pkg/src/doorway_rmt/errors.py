"""Exception types shared across the package."""


class InvalidSpecError(ValueError):
    """An ensemble or experiment specification violates its invariants."""


class EigensolverError(RuntimeError):
    """A dense self-adjoint eigendecomposition failed to converge."""


class DegenerateDrawError(RuntimeError):
    """A degenerate spectrum draw persisted beyond the retry budget."""


class QuadratureError(RuntimeError):
    """A numerical integration did not reach the requested tolerance."""


class UsageError(ValueError):
    """Bad command-line arguments or configuration input."""
