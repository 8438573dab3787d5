from .world import Plane, WorldModel, default_world, raycast
from .trajectory import TrajectoryKind, TrajectorySpec, Kinematics, exact_state
from .sensors import BiasSpec, ScanPattern, gen_imu, gen_sweep
from .run import RunSimulator, SimulatedRun

__all__ = [
    'Plane',
    'WorldModel',
    'default_world',
    'raycast',
    'TrajectoryKind',
    'TrajectorySpec',
    'Kinematics',
    'exact_state',
    'BiasSpec',
    'ScanPattern',
    'gen_imu',
    'gen_sweep',
    'RunSimulator',
    'SimulatedRun',
]
