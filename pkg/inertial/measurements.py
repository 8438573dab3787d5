from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from errors import CoverageError

# A gap inside a window may not exceed this many nominal sample periods
MAX_GAP_PERIODS = 2.0


@dataclass(frozen=True, eq=False)
class ImuSample:
    """Raw specific force (m/s²) and angular rate (rad/s) at one instant"""

    accel: np.ndarray
    gyro: np.ndarray
    timestamp: float

    def __post_init__(self):
        for name in ("accel", "gyro"):
            v = np.array(getattr(self, name), dtype=float).reshape(3)
            v.setflags(write=False)
            object.__setattr__(self, name, v)
        object.__setattr__(self, "timestamp", float(self.timestamp))


@dataclass(frozen=True)
class ImuNoiseModel:
    """Continuous-time noise densities of the IMU"""

    accel_noise: float = 0.02        # m/s²/√Hz
    gyro_noise: float = 0.002        # rad/s/√Hz
    accel_bias_walk: float = 2e-4    # m/s³/√Hz
    gyro_bias_walk: float = 2e-5     # rad/s²/√Hz
    gravity_norm: float = 9.81       # m/s²

    def __post_init__(self):
        for name in ("accel_noise", "gyro_noise", "accel_bias_walk", "gyro_bias_walk", "gravity_norm"):
            value = getattr(self, name)
            if not value > 0.0:
                raise ValueError(f"ImuNoiseModel.{name} must be strictly positive, got {value}")


def interpolate_sample(a: ImuSample, b: ImuSample, t: float) -> ImuSample:
    """Linear interpolation between two samples"""
    span = b.timestamp - a.timestamp
    s = 0.0 if span <= 0.0 else (t - a.timestamp) / span
    return ImuSample(
        accel=(1.0 - s) * a.accel + s * b.accel,
        gyro=(1.0 - s) * a.gyro + s * b.gyro,
        timestamp=t,
    )


def nominal_period(timestamps: np.ndarray) -> float:
    diffs = np.diff(np.asarray(timestamps, dtype=float))
    if diffs.size == 0:
        return 0.0
    return float(np.median(diffs))


class ImuBuffer:
    """Time-indexed IMU stream with window extraction"""

    def __init__(self, samples: Sequence[ImuSample], period: Optional[float] = None):
        self.samples = list(samples)
        self.timestamps = np.array([s.timestamp for s in self.samples], dtype=float)
        if self.timestamps.size > 1 and np.any(np.diff(self.timestamps) <= 0.0):
            raise CoverageError("IMU timestamps are not strictly increasing")
        self.period = period if period is not None else nominal_period(self.timestamps)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def t_first(self) -> float:
        return float(self.timestamps[0])

    @property
    def t_last(self) -> float:
        return float(self.timestamps[-1])

    def covers(self, t0: float, t1: float, tolerance: float = 1e-9) -> bool:
        return len(self.samples) > 1 and self.t_first <= t0 + tolerance and self.t_last >= t1 - tolerance

    def window(self, t0: float, t1: float, tolerance: float = 1e-9) -> List[ImuSample]:
        """Samples in [t0, t1] with interpolated samples inserted at both ends"""
        if t1 <= t0:
            raise ValueError(f"Empty IMU window [{t0}, {t1}]")
        if not self.covers(t0, t1, tolerance):
            raise CoverageError(
                f"IMU stream [{self.t_first if len(self) else float('nan'):.6f}, "
                f"{self.t_last if len(self) else float('nan'):.6f}] does not cover [{t0:.6f}, {t1:.6f}]"
            )

        lo = int(np.searchsorted(self.timestamps, t0 - tolerance, side="left"))
        hi = int(np.searchsorted(self.timestamps, t1 + tolerance, side="right"))
        window = self.samples[lo:hi]

        if not window or abs(window[0].timestamp - t0) > tolerance:
            before = self.samples[max(lo - 1, 0)]
            after = self.samples[min(lo, len(self.samples) - 1)]
            window.insert(0, interpolate_sample(before, after, t0))
        if abs(window[-1].timestamp - t1) > tolerance:
            before = self.samples[max(hi - 1, 0)]
            after = self.samples[min(hi, len(self.samples) - 1)]
            window.append(interpolate_sample(before, after, t1))

        times = np.array([s.timestamp for s in window])
        if self.period > 0.0 and np.max(np.diff(times)) > MAX_GAP_PERIODS * self.period + tolerance:
            raise CoverageError(f"IMU gap larger than {MAX_GAP_PERIODS:g} periods inside [{t0:.6f}, {t1:.6f}]")
        return window


def imu_window(samples: Sequence[ImuSample], t0: float, t1: float) -> List[ImuSample]:
    return ImuBuffer(samples).window(t0, t1)


def check_window(samples: Sequence[ImuSample], t0: float, t1: float, period: Optional[float] = None,
                 tolerance: float = 1e-9):
    """Raise CoverageError unless the samples span [t0, t1] without large gaps"""
    if len(samples) < 2:
        raise CoverageError("At least two IMU samples are required")
    times = np.array([s.timestamp for s in samples])
    if times[0] > t0 + tolerance or times[-1] < t1 - tolerance:
        raise CoverageError(f"IMU samples [{times[0]:.6f}, {times[-1]:.6f}] do not cover [{t0:.6f}, {t1:.6f}]")
    period = period if period is not None else nominal_period(times)
    if period > 0.0 and np.max(np.diff(times)) > MAX_GAP_PERIODS * period + tolerance:
        raise CoverageError(f"IMU gap larger than {MAX_GAP_PERIODS:g} periods inside [{t0:.6f}, {t1:.6f}]")
