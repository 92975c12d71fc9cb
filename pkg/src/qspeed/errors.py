"""Exception hierarchy for qspeed."""


class QSpeedError(Exception):
    """Base class for all library errors."""


class NonHermitianInput(QSpeedError, ValueError):
    pass


class InvalidDimension(QSpeedError, ValueError):
    pass


class InvalidTransition(QSpeedError, ValueError):
    pass


class UnsupportedDimension(QSpeedError, ValueError):
    pass


class SegmentOutOfRange(QSpeedError, IndexError):
    pass


class DimensionMismatch(QSpeedError, ValueError):
    pass


class NonUnitaryRealized(QSpeedError, ValueError):
    pass


class NonpositiveCoupling(QSpeedError, ValueError):
    pass


class ZeroHamiltonian(QSpeedError, ValueError):
    pass


class ConfigError(QSpeedError, ValueError):
    """Invalid sweep/optimizer/device configuration."""
