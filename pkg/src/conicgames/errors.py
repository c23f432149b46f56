"""Exception types shared across the package."""


class ParseError(ValueError):
    """A game/correlation/graph/CSP file is malformed; the message names the field."""


class CapExceededError(ValueError):
    """An exact enumeration or search would exceed the configured size cap."""


class PreconditionError(ValueError):
    """An operation was called on input that violates its stated precondition."""
