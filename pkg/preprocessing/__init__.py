from .sweep import TimedPoint, Sweep
from .downsample import quantitative_downsample, voxel_downsample, downsample, voxel_keys
from .undistortion import (
    undistort_uniform,
    undistort_imu,
    interpolated_lidar_poses,
    propagate_imu_poses,
)

__all__ = [
    'TimedPoint',
    'Sweep',
    'quantitative_downsample',
    'voxel_downsample',
    'downsample',
    'voxel_keys',
    'undistort_uniform',
    'undistort_imu',
    'interpolated_lidar_poses',
    'propagate_imu_poses',
]
