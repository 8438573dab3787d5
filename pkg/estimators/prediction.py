import logging
from typing import Optional, Sequence, Tuple

import numpy as np

from errors import NonFiniteStateError, TimestampMismatchError
from geometry import NavState
from inertial import ImuNoiseModel, ImuSample, Preintegration, check_window, integrate, predict_state

logger = logging.getLogger(__name__)


def predict(x_prev_end: NavState, imu_window: Sequence[ImuSample], gravity: np.ndarray,
            pre: Optional[Preintegration] = None,
            noise: Optional[ImuNoiseModel] = None) -> Tuple[NavState, NavState]:
    """Begin state copied from the previous end state, end state by IMU integration with biases held"""
    if not x_prev_end.is_finite():
        raise NonFiniteStateError(f"Cannot predict from a non-finite state at t={x_prev_end.timestamp}")
    check_window(imu_window, x_prev_end.timestamp, imu_window[-1].timestamp if imu_window else x_prev_end.timestamp)
    if abs(imu_window[0].timestamp - x_prev_end.timestamp) > 1e-9:
        raise TimestampMismatchError(
            f"IMU window starts at {imu_window[0].timestamp:.9f}, previous end state at {x_prev_end.timestamp:.9f}"
        )
    if pre is None:
        pre = integrate(imu_window, x_prev_end.accel_bias, x_prev_end.gyro_bias, noise)

    x_e = predict_state(pre, x_prev_end, gravity)
    if not x_e.is_finite():
        raise NonFiniteStateError(f"Prediction diverged at t={x_e.timestamp}")
    logger.debug(f"Predicted end state at t={x_e.timestamp:.6f}: translation {np.round(x_e.translation, 4)}")
    return x_prev_end, x_e
