"""Exception hierarchy shared across the package."""


class DmresError(Exception):
    """Base class for all domain errors raised by this package."""


class InvalidStateError(DmresError):
    """A ket, density matrix, observable or unitary fails its invariants."""


class InvalidElementError(DmresError):
    """An element index is out of range or otherwise unusable."""


class InvalidCouplingError(DmresError):
    """A coupling strength or coupling operator violates a precondition."""


class CalibrationError(DmresError):
    """The estimator calibration is singular or misses its residual target."""


class StateFormatError(DmresError):
    """A state file cannot be parsed into a ket or density matrix."""


class DimensionLimitError(DmresError):
    """The joint system-meter dimension exceeds the supported limit."""
