from .trajectory import Trajectory, read_trajectory, write_trajectory, write_states
from .metrics import align_rigid, associate, ate_rmse, velocity_smoothness, zigzag_score
from .report import consistency_report, format_report, format_table, speed_csv, read_speed_csv

__all__ = [
    'Trajectory',
    'read_trajectory',
    'write_trajectory',
    'write_states',
    'align_rigid',
    'associate',
    'ate_rmse',
    'velocity_smoothness',
    'zigzag_score',
    'consistency_report',
    'format_report',
    'format_table',
    'speed_csv',
    'read_speed_csv',
]
