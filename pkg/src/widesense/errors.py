"""Exception hierarchy shared across the package."""


class DomainError(ValueError):
    """An input violates a documented precondition."""


class ConfigError(ValueError):
    """An experiment or CLI configuration is malformed."""


class NumericalError(RuntimeError):
    """A numerical routine failed to meet its accuracy contract."""


class DegeneratePartitionError(DomainError):
    """Subband segmentation produced no usable partition."""


class DegenerateCalibrationWarning(UserWarning):
    """All calibration statistics were identical; threshold is pinned."""
