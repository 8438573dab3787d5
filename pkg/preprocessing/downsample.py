import logging

import numpy as np

from .sweep import Sweep

logger = logging.getLogger(__name__)

QUANTITATIVE_STRIDE = 4
DEFAULT_VOXEL_SIZE = 0.5


def quantitative_downsample(sweep: Sweep, stride: int = QUANTITATIVE_STRIDE) -> Sweep:
    """Keep one point out of every `stride` (indices 0, stride, 2·stride, ...)"""
    if stride < 1:
        raise ValueError(f"Stride must be >= 1, got {stride}")
    return sweep.subset(np.arange(0, len(sweep), stride))


def voxel_keys(points: np.ndarray, voxel_size: float) -> np.ndarray:
    return np.floor(np.asarray(points, dtype=float) / voxel_size).astype(np.int64)


def voxel_downsample(sweep: Sweep, voxel_size: float = DEFAULT_VOXEL_SIZE) -> Sweep:
    """At most one point per voxel; the first point to land in a cell wins, input order is kept"""
    if not voxel_size > 0.0:
        raise ValueError(f"Voxel size must be positive, got {voxel_size}")
    if len(sweep) == 0:
        return sweep
    keys = voxel_keys(sweep.points, voxel_size)
    _, first = np.unique(keys, axis=0, return_index=True)
    return sweep.subset(np.sort(first))


def downsample(sweep: Sweep, stride: int = QUANTITATIVE_STRIDE, voxel_size: float = DEFAULT_VOXEL_SIZE) -> Sweep:
    """Quantitative then voxel down-sampling"""
    reduced = voxel_downsample(quantitative_downsample(sweep, stride), voxel_size)
    logger.debug(f"Sweep {sweep.index}: {len(sweep)} -> {len(reduced)} points after down-sampling")
    return reduced
