# errors.py

class OdometryError(Exception):
    """Base error for the odometry toolkit, carries a CLI exit code"""

    exit_code = 3
    code = "odometry_error"

    def __init__(self, message: str = ""):
        super().__init__(message)
        self.message = message

    def one_line(self) -> str:
        """Single machine-parsable line for stderr"""
        text = " ".join(str(self.message).split())
        return f"error: {self.code}: {text}"


class UsageError(OdometryError):
    exit_code = 1
    code = "usage"


class DataError(OdometryError):
    exit_code = 2
    code = "data"


class CoverageError(DataError):
    """IMU samples do not cover the requested interval"""
    code = "imu_coverage"


class TimestampMismatchError(DataError):
    code = "timestamp_mismatch"


class AlignmentError(DataError):
    """IMU stream and sweeps cannot be aligned"""
    code = "alignment"


class OverlapError(DataError):
    code = "overlap"


class FileFormatError(DataError):
    code = "file_format"


class EmptySweepError(DataError):
    code = "empty_sweep"


class NumericalError(OdometryError):
    exit_code = 3
    code = "numerical"


class NonFiniteStateError(NumericalError):
    code = "non_finite_state"


class DegenerateFitError(NumericalError):
    code = "degenerate_fit"


class DegenerateGeometryError(NumericalError):
    """Too few plane associations; carries the prediction-only fallback estimate"""

    code = "degenerate_geometry"

    def __init__(self, message: str = "", fallback=None):
        super().__init__(message)
        self.fallback = fallback


class InitializationError(NumericalError):
    code = "initialization"


class NotStationaryError(InitializationError):
    code = "not_stationary"
