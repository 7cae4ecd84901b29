"""Exception types shared across the package."""


class EikNetError(Exception):
    """Base class for all errors raised by this package."""


class LoopArcError(EikNetError):
    """An arc spec has coinciding tail and head."""


class DisconnectedError(EikNetError):
    """The network is not connected."""


class NonpositiveLengthError(EikNetError):
    """An arc was given a length <= 0."""


class InadmissiblePairError(EikNetError):
    """The requested (dx, dt) pair violates the admissibility conditions."""


class OutOfDomainError(EikNetError):
    """A coordinate lies outside its arc or grid domain."""


class NonCoerciveError(EikNetError):
    """A Hamiltonian's minimum or conjugate maximum sits on the truncation boundary."""


class EmptyFeasibleSetError(EikNetError):
    """The slope feasible set of an arc update is empty (defensive; cannot occur
    for nodes inside the arc)."""


class ParameterConstraintError(EikNetError):
    """Benchmark case parameters violate their constraints."""


class NonFiniteLayerError(EikNetError):
    """A grid layer contains NaN or infinite values."""
