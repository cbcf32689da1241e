"""Exception and warning types shared across the package."""


class ScanwaitError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameterError(ScanwaitError, ValueError):
    """An argument violates a documented precondition."""


class EnumerationCapError(ScanwaitError):
    """Refusing to enumerate a pattern family larger than the configured cap."""


class DimensionCapError(ScanwaitError):
    """A dense linear system would exceed the configured dimension limit."""


class SingularMatrixError(ScanwaitError):
    """Factorisation of a waiting-time system failed."""


class NegativeVarianceError(ScanwaitError):
    """A second-moment solve produced a variance below the numerical-noise floor."""


class MissingVarianceError(ScanwaitError):
    """The operation requires a variance that has not been computed."""


class NoRootError(ScanwaitError):
    """A monotone threshold search found no crossing inside its bracket."""


class IterationCapError(ScanwaitError):
    """A simulation replication exceeded the hard step cap."""


class NeighbourhoodBlowupError(ScanwaitError):
    """Trap-neighbourhood enumeration would need 2**|W| terms beyond the guard."""


class MonotonicityViolationError(ScanwaitError):
    """A feasibility scan observed non-monotone behaviour where it assumes monotonicity."""


class ScenarioFormatError(ScanwaitError):
    """A scenario file does not match the documented schema."""


class IllConditionedWarning(UserWarning):
    """The assembled system is estimated to be numerically ill-conditioned."""
