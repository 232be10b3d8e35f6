"""Exception types raised by the solvers."""


class MsbError(Exception):
    """Base class for all package errors."""


class DomainError(MsbError, ValueError):
    """An effort or other argument lies outside its admissible domain."""


class InstanceError(MsbError, ValueError):
    """A game instance violates a structural invariant."""


class CapExceededError(MsbError):
    """An exhaustive routine was asked to enumerate too many subsets."""


class NotLinearError(MsbError, ValueError):
    """The shared benefit is not linear in the player contributions."""


class NotDecomposableError(MsbError, ValueError):
    """The shared benefit does not split into a coupled block plus a linear part."""


class InvalidSharesError(MsbError, ValueError):
    """Some share is not an integer multiple of the FCOP unit."""


class ZeroShareError(MsbError, ValueError):
    """A value-to-share ratio was requested for a player with zero share."""


class MonotonicityError(MsbError, RuntimeError):
    """Best-response iterates moved against the lattice direction."""
