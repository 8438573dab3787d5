from .pipeline import OdometryPipeline, RunResult
from .sweep_log import SweepLog, SweepRecord, SweepStatus
from .dataset import Dataset, read_dataset, write_dataset, read_imu, read_sweep

__all__ = [
    'OdometryPipeline',
    'RunResult',
    'SweepLog',
    'SweepRecord',
    'SweepStatus',
    'Dataset',
    'read_dataset',
    'write_dataset',
    'read_imu',
    'read_sweep',
]
