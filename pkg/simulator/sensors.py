import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from errors import EmptySweepError
from geometry import Pose
from inertial import ImuNoiseModel, ImuSample
from preprocessing import Sweep
from .trajectory import TrajectorySpec
from .world import WorldModel, raycast

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BiasSpec:
    """Initial IMU biases; they random-walk with the noise model densities when noise is enabled"""
    accel: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    gyro: Tuple[float, float, float] = (0.0, 0.0, 0.0)


@dataclass(frozen=True)
class ScanPattern:
    """Spinning LiDAR: fixed elevation rings, one azimuth column fired per time step"""
    rings: int = 16
    min_elevation_deg: float = -15.0
    max_elevation_deg: float = 15.0
    azimuth_steps: int = 720
    min_range: float = 0.5
    max_range: float = 100.0

    def directions(self) -> np.ndarray:
        """(azimuth_steps, rings, 3) unit ray directions in the sensor frame"""
        elevation = np.radians(np.linspace(self.min_elevation_deg, self.max_elevation_deg, self.rings))
        azimuth = 2.0 * np.pi * np.arange(self.azimuth_steps) / self.azimuth_steps
        az, el = np.meshgrid(azimuth, elevation, indexing="ij")
        return np.stack([np.cos(el) * np.cos(az), np.cos(el) * np.sin(az), np.sin(el)], axis=-1)


def gen_imu(spec: TrajectorySpec, rate: float = 200.0, noise: Optional[ImuNoiseModel] = None,
            bias: BiasSpec = None, seed: int = 0, gravity: np.ndarray = None) -> List[ImuSample]:
    """IMU stream along the trajectory; noise=None yields exact measurements with constant biases"""
    if rate < 50.0:
        raise ValueError(f"IMU rate must be >= 50 Hz, got {rate}")
    bias = bias or BiasSpec()
    g = np.array([0.0, 0.0, (noise or ImuNoiseModel()).gravity_norm]) if gravity is None else np.asarray(gravity)
    rng = np.random.default_rng([seed, 0])
    dt = 1.0 / rate
    count = int(np.floor(spec.duration * rate + 1e-9)) + 1

    accel_bias = np.asarray(bias.accel, dtype=float)
    gyro_bias = np.asarray(bias.gyro, dtype=float)
    samples = []
    for k in range(count):
        t = k * dt
        kin = spec.kinematics(t)
        accel = kin.rotation.inverse().apply(kin.acceleration + g) + accel_bias
        gyro = kin.angular_rate + gyro_bias
        if noise is not None:
            accel = accel + noise.accel_noise * np.sqrt(rate) * rng.standard_normal(3)
            gyro = gyro + noise.gyro_noise * np.sqrt(rate) * rng.standard_normal(3)
            accel_bias = accel_bias + noise.accel_bias_walk * np.sqrt(dt) * rng.standard_normal(3)
            gyro_bias = gyro_bias + noise.gyro_bias_walk * np.sqrt(dt) * rng.standard_normal(3)
        samples.append(ImuSample(accel, gyro, t))
    logger.debug(f"Generated {len(samples)} IMU samples at {rate:g} Hz")
    return samples


def gen_sweep(world: WorldModel, spec: TrajectorySpec, t_begin: float, t_end: float,
              pattern: ScanPattern = None, range_noise: float = 0.0, seed: int = 0,
              extrinsic: Pose = None, index: int = 0) -> Sweep:
    """Ray-cast one revolution; every azimuth column carries its own emission time"""
    if not t_end > t_begin:
        raise ValueError(f"t_end {t_end} must exceed t_begin {t_begin}")
    pattern = pattern or ScanPattern()
    extrinsic = extrinsic or Pose.identity()
    rng = np.random.default_rng([seed, 1, index])

    times = np.linspace(t_begin, t_end, pattern.azimuth_steps)
    local = pattern.directions()
    points, stamps = [], []
    for column, t in enumerate(times):
        kin = spec.kinematics(t)
        lidar = Pose(kin.rotation, kin.position) * extrinsic
        directions = lidar.rotation.apply(local[column])
        ranges = raycast(world, lidar.translation, directions, pattern.max_range)
        hit = np.isfinite(ranges) & (ranges >= pattern.min_range)
        if not np.any(hit):
            continue
        measured = ranges[hit]
        if range_noise > 0.0:
            measured = measured + range_noise * rng.standard_normal(measured.shape[0])
        points.append(local[column][hit] * measured[:, None])
        stamps.append(np.full(measured.shape[0], t))

    if not points:
        raise EmptySweepError(f"Sweep {index} [{t_begin:.3f}, {t_end:.3f}] sees no geometry")
    return Sweep(np.vstack(points), np.concatenate(stamps), t_begin, t_end, index)
