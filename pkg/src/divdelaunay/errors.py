"""Exception types raised on bad input; verification failures are report outcomes, not exceptions."""


class InputError(ValueError):
    """Malformed or out-of-contract input (CLI exit code 1)."""


class DomainError(InputError):
    """A point lies outside the domain of a divergence."""


class InvalidDivergence(InputError):
    """A divergence violates its contract, e.g. a non-SPD metric."""


class UnsupportedError(InputError):
    """Operation not available for this divergence family."""


class ResolutionError(InputError):
    """Grid too coarse for the site set."""


class CapacityError(InputError):
    """Cannot place the requested number of sites."""


class DegenerateInputError(InputError):
    """Input is degenerate at floating-point resolution."""


class InvariantViolation(RuntimeError):
    """Internal invariant broken; indicates a bug rather than bad input."""
