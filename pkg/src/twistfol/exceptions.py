"""Exception hierarchy shared by all modules."""


class TwistFolError(Exception):
    """Base class for errors raised by twistfol."""


class DivergenceError(TwistFolError):
    """An orbit left the configured magnitude bound."""


class StepSizeError(TwistFolError):
    """A finite-difference step underflowed against its base point."""


class NonGraphError(TwistFolError):
    """A sampled curve (or its image) is not a graph over the circle."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class LabelingError(TwistFolError):
    """A foliation's leaves do not have mean value equal to their label."""


class InsufficientDataError(TwistFolError):
    """Too few valid samples remained for a fit."""


class InsufficientIterationsError(TwistFolError, ValueError):
    """Requested orbit length is below the supported minimum."""


class NotInvariantError(TwistFolError):
    """A leaf is not mapped to itself within tolerance."""

    def __init__(self, message, max_deviation=float("nan")):
        super().__init__(message)
        self.max_deviation = max_deviation


class PreconditionError(TwistFolError):
    """An operation's precondition was checked and failed."""


class TorsionSignError(TwistFolError):
    """Torsion along a periodic leaf is not strictly positive."""


class VerticalImageError(TwistFolError):
    """A pushed vertical came back vertical (slope undefined)."""


class NotStraightenableError(TwistFolError):
    """A generating grid fails the hypotheses needed for a straightening."""

    def __init__(self, message, c_node=None, reason=""):
        super().__init__(message)
        self.c_node = c_node
        self.reason = reason


class DomainError(TwistFolError, ValueError):
    """A window or evaluation point lies outside the usable domain."""


class ParameterError(TwistFolError, ValueError):
    """Construction parameters violate their stated constraints."""


class ConstructionError(TwistFolError):
    """A closed-form construction produced an invalid object."""
