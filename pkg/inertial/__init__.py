from .measurements import (
    ImuSample,
    ImuNoiseModel,
    ImuBuffer,
    imu_window,
    interpolate_sample,
    check_window,
)
from .preintegration import (
    Preintegration,
    integrate,
    repropagate,
    bias_corrected,
    compose,
    predict_state,
    imu_residual,
    residual_jacobian,
)
from .initialization import InitResult, static_init

__all__ = [
    'ImuSample',
    'ImuNoiseModel',
    'ImuBuffer',
    'imu_window',
    'interpolate_sample',
    'check_window',
    'Preintegration',
    'integrate',
    'repropagate',
    'bias_corrected',
    'compose',
    'predict_state',
    'imu_residual',
    'residual_jacobian',
    'InitResult',
    'static_init',
]
