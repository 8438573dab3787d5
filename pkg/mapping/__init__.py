from .voxel_map import VoxelMap, PlaneFit, InsertionReport, fit_plane, fit_planes

__all__ = [
    'VoxelMap',
    'PlaneFit',
    'InsertionReport',
    'fit_plane',
    'fit_planes',
]
