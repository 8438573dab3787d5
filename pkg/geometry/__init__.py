from .rotation import (
    Rotation,
    so3_exp,
    so3_log,
    skew,
    right_jacobian,
    right_jacobian_inverse,
    left_jacobian_inverse,
)
from .pose import Pose, interpolate_pose
from .state import (
    NavState,
    boxplus,
    boxminus,
    STATE_DIM,
    T_SLICE,
    R_SLICE,
    V_SLICE,
    BA_SLICE,
    BG_SLICE,
)

__all__ = [
    'Rotation',
    'so3_exp',
    'so3_log',
    'skew',
    'right_jacobian',
    'right_jacobian_inverse',
    'left_jacobian_inverse',
    'Pose',
    'interpolate_pose',
    'NavState',
    'boxplus',
    'boxminus',
    'STATE_DIM',
    'T_SLICE',
    'R_SLICE',
    'V_SLICE',
    'BA_SLICE',
    'BG_SLICE',
]
