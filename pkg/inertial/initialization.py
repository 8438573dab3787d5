import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from errors import InitializationError, NotStationaryError
from geometry import NavState, Rotation
from .measurements import ImuNoiseModel, ImuSample

logger = logging.getLogger(__name__)

DEFAULT_WINDOW = 1.0
DEFAULT_STATIONARITY_THRESHOLD = 0.05  # (m/s²)², above the accelerometer white noise


@dataclass(frozen=True, eq=False)
class InitResult:
    """Outcome of static initialization"""

    gravity: np.ndarray
    accel_bias: np.ndarray
    gyro_bias: np.ndarray
    state: NavState
    accel_norm_variance: float


def level_rotation(up_in_body: np.ndarray) -> Rotation:
    """Body-to-world rotation mapping the measured up direction onto world z, yaw fixed to zero"""
    z = up_in_body / np.linalg.norm(up_in_body)
    reference = np.array([1.0, 0.0, 0.0])
    if abs(z @ reference) > 0.9:
        reference = np.array([0.0, 1.0, 0.0])
    x = reference - (reference @ z) * z
    x /= np.linalg.norm(x)
    y = np.cross(z, x)
    # rows are the world axes expressed in the body frame
    return Rotation.from_matrix(np.vstack([x, y, z]))


def static_init(samples: Sequence[ImuSample], window: float = DEFAULT_WINDOW,
                noise: ImuNoiseModel = None,
                stationarity_threshold: float = DEFAULT_STATIONARITY_THRESHOLD) -> InitResult:
    """Estimate gravity, biases and the initial state from a stationary IMU segment"""
    noise = noise or ImuNoiseModel()
    if len(samples) < 2:
        raise InitializationError(f"Static initialization needs IMU samples, got {len(samples)}")

    t0 = samples[0].timestamp
    used = [s for s in samples if s.timestamp <= t0 + window + 1e-9]
    span = used[-1].timestamp - t0
    if len(used) < 2 or span < window - 1e-9:
        raise InitializationError(f"IMU samples span {span:.3f}s, initialization window is {window:.3f}s")

    accels = np.array([s.accel for s in used])
    gyros = np.array([s.gyro for s in used])
    norms = np.linalg.norm(accels, axis=1)
    variance = float(np.var(norms))
    # discrete white-noise variance of one sample at the observed rate
    rate = (len(used) - 1) / span
    white = noise.accel_noise ** 2 * rate
    if variance - white > stationarity_threshold:
        raise NotStationaryError(
            f"Accelerometer norm variance {variance:.4f} exceeds the {white:.4f} expected from noise "
            f"by more than {stationarity_threshold:.4f}; platform is moving"
        )

    mean_accel = accels.mean(axis=0)
    gyro_bias = gyros.mean(axis=0)
    rotation = level_rotation(mean_accel)
    gravity = np.array([0.0, 0.0, noise.gravity_norm])
    accel_bias = mean_accel - rotation.inverse().apply(gravity)

    state = NavState(
        translation=np.zeros(3),
        rotation=rotation,
        velocity=np.zeros(3),
        accel_bias=accel_bias,
        gyro_bias=gyro_bias,
        timestamp=used[-1].timestamp,
    )
    logger.info(
        f"Static initialization over {span:.2f}s: gyro bias {np.round(gyro_bias, 5)}, "
        f"accel bias {np.round(accel_bias, 4)}, norm variance {variance:.2e}"
    )
    return InitResult(
        gravity=gravity,
        accel_bias=accel_bias,
        gyro_bias=gyro_bias,
        state=state,
        accel_norm_variance=variance,
    )
