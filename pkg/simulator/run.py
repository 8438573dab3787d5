import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from tqdm import tqdm

from geometry import NavState, Pose
from inertial import ImuNoiseModel, ImuSample
from preprocessing import Sweep
from .sensors import BiasSpec, ScanPattern, gen_imu, gen_sweep
from .trajectory import TrajectorySpec, exact_state
from .world import WorldModel, default_world


@dataclass
class SimulatedRun:
    """Everything one simulated drive produces"""
    spec: TrajectorySpec
    world: WorldModel
    imu: List[ImuSample]
    sweeps: List[Sweep]
    ground_truth: List[NavState] = field(default_factory=list)


class RunSimulator:
    """Generates synchronized IMU, LiDAR and ground truth for one trajectory"""

    def __init__(self, world: WorldModel = None, sweep_rate: float = 10.0, imu_rate: float = 200.0,
                 noise: Optional[ImuNoiseModel] = None, bias: BiasSpec = None, pattern: ScanPattern = None,
                 range_noise: float = 0.0, extrinsic: Pose = None, show_progress: bool = False):
        if not sweep_rate > 0.0:
            raise ValueError(f"Sweep rate must be positive, got {sweep_rate}")
        self.world = world or default_world()
        self.sweep_rate = sweep_rate
        self.imu_rate = imu_rate
        self.noise = noise
        self.bias = bias or BiasSpec()
        self.pattern = pattern or ScanPattern()
        self.range_noise = range_noise
        self.extrinsic = extrinsic or Pose.identity()
        self.show_progress = show_progress
        self.logger = logging.getLogger(__name__)

    def sweep_bounds(self, duration: float) -> np.ndarray:
        """Sweep boundary times 0, 1/rate, ... not exceeding the duration"""
        count = int(np.floor(duration * self.sweep_rate + 1e-9))
        return np.arange(count + 1) / self.sweep_rate

    def simulate(self, spec: TrajectorySpec) -> SimulatedRun:
        imu = gen_imu(spec, self.imu_rate, self.noise, self.bias, spec.seed, self.world.gravity)
        bounds = self.sweep_bounds(spec.duration)
        sweeps = []
        indices = range(len(bounds) - 1)
        for index in tqdm(indices, desc="sweeps", disable=not self.show_progress):
            sweeps.append(gen_sweep(
                self.world, spec, bounds[index], bounds[index + 1], self.pattern,
                self.range_noise, spec.seed, self.extrinsic, index,
            ))
        truth = [exact_state(spec, s.timestamp) for s in imu]
        self.logger.info(
            f"Simulated {spec.kind.value} run: {spec.duration:g}s, {len(sweeps)} sweeps, {len(imu)} IMU samples"
        )
        return SimulatedRun(spec=spec, world=self.world, imu=imu, sweeps=sweeps, ground_truth=truth)
