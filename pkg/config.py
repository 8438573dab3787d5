# config.py

import dataclasses
import logging
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Dict, Optional, Tuple

import numpy as np
from dotenv import load_dotenv

from errors import UsageError
from estimators import LOGICAL_SIGMAS, EstimatorConfig, EstimatorMode, PointWeightMode, UndistortionMode
from geometry import Pose, Rotation
from inertial import ImuNoiseModel
from simulator import BiasSpec, ScanPattern, TrajectoryKind, TrajectorySpec

# Load environment variables
load_dotenv()


class Config:
    """Process-level settings read from the environment"""

    # Application Settings
    DEBUG = os.getenv('DEBUG', 'False').lower() == 'true'
    LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO')

    # Paths
    DATA_DIR = os.getenv('DATA_DIR', 'data')
    OUTPUT_DIR = os.getenv('OUTPUT_DIR', 'output')

    # Runs
    DEFAULT_SEED = int(os.getenv('DEFAULT_SEED', '0'))
    SHOW_PROGRESS = os.getenv('SHOW_PROGRESS', 'False').lower() == 'true'

    @classmethod
    def log_level(cls) -> int:
        return logging.DEBUG if cls.DEBUG else getattr(logging, cls.LOG_LEVEL.upper())

    @classmethod
    def validate(cls):
        """Validate required configuration"""
        if not isinstance(getattr(logging, cls.LOG_LEVEL.upper(), None), int):
            raise ValueError(f"LOG_LEVEL {cls.LOG_LEVEL} is not a logging level")
        return True


Vector3 = Tuple[float, float, float]

_CHOICES = {
    "mode": [m.value for m in EstimatorMode],
    "undistort": [m.value for m in UndistortionMode],
    "point_weight": [m.value for m in PointWeightMode],
    "trajectory": [k.value for k in TrajectoryKind],
}


@dataclass(frozen=True)
class RunConfig:
    """Every knob of simulate/run/evaluate, loadable from a flat key = value file"""

    # estimator
    mode: str = "semi-elastic"
    undistort: str = "imu"
    max_outer_iterations: int = 5
    max_inner_iterations: int = 10
    tolerance: float = 1e-6
    huber_delta: Optional[float] = 0.1
    imu_huber_delta: Optional[float] = None
    logical_huber_delta: Optional[float] = None
    point_variance: float = 0.001
    logical_weight: float = 1.0
    logical_sigmas: Tuple[float, float, float, float, float] = LOGICAL_SIGMAS
    neighbors: int = 20
    min_neighbors: int = 5
    min_associations: int = 10
    max_point_to_plane: float = 0.5
    reundistort_each_iteration: bool = True
    point_weight: str = "planarity"

    # preprocessing and map
    downsample_stride: int = 4
    downsample_voxel: float = 0.5
    map_voxel_size: float = 1.0
    map_capacity: int = 20
    map_search_window: int = 1
    map_prune_distance: float = 500.0

    # IMU model and calibration
    accel_noise: float = 0.02
    gyro_noise: float = 0.002
    accel_bias_walk: float = 2e-4
    gyro_bias_walk: float = 2e-5
    gravity_norm: float = 9.81
    extrinsic_translation: Vector3 = (0.0, 0.0, 0.0)
    extrinsic_rotation: Tuple[float, float, float, float] = (0.0, 0.0, 0.0, 1.0)
    init_window: float = 1.0
    stationarity_threshold: float = 0.05

    # simulator
    trajectory: str = "circular"
    duration: float = 30.0
    radius: float = 5.0
    speed: float = 2.0
    lead_in: float = 2.0
    ramp: float = 2.0
    sweep_rate: float = 10.0
    imu_rate: float = 200.0
    imu_noise: bool = True
    range_noise: float = 0.02
    accel_bias_init: Vector3 = (0.0, 0.0, 0.0)
    gyro_bias_init: Vector3 = (0.0, 0.0, 0.0)
    rings: int = 16
    azimuth_steps: int = 720

    # run control
    seed: int = Config.DEFAULT_SEED
    corrupt_sweep_index: int = -1
    corrupt_offset: Vector3 = (0.2, 0.0, 0.0)
    write_map: bool = False
    show_progress: bool = Config.SHOW_PROGRESS

    def __post_init__(self):
        self.validate()

    def validate(self):
        for key, allowed in _CHOICES.items():
            if getattr(self, key) not in allowed:
                raise UsageError(f"{key} must be one of {', '.join(allowed)}, got '{getattr(self, key)}'")
        for key in ("tolerance", "point_variance", "logical_weight", "downsample_voxel", "map_voxel_size",
                    "map_prune_distance", "gravity_norm", "init_window", "duration", "sweep_rate", "imu_rate"):
            if not getattr(self, key) > 0.0:
                raise UsageError(f"{key} must be positive, got {getattr(self, key)}")
        if self.range_noise < 0.0:
            raise UsageError("range_noise must be >= 0")
        try:
            self.estimator_config().validate()
            self.noise_model()
        except ValueError as e:
            raise UsageError(str(e))
        return True

    # construction

    @classmethod
    def from_text(cls, text: str, source: str = "<config>") -> "RunConfig":
        values = {}
        for number, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{source}:{number}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            values[key] = value
        return cls().with_overrides(values)

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as e:
            raise UsageError(f"Cannot read config {path}: {e}")
        return cls.from_text(text, str(path))

    def with_overrides(self, overrides: Dict[str, object]) -> "RunConfig":
        """Copy with keys replaced; string values are parsed with the field's type"""
        known = {f.name: f for f in fields(self)}
        changes = {}
        for key, value in overrides.items():
            if key not in known:
                raise UsageError(f"Unknown config key '{key}'")
            changes[key] = _parse(known[key].type, value, key) if isinstance(value, str) else value
        return dataclasses.replace(self, **changes)

    def dump(self) -> str:
        lines = ["# odometry run configuration (key = value)"]
        for f in fields(self):
            lines.append(f"{f.name} = {_render(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"

    # typed views

    def estimator_config(self) -> EstimatorConfig:
        return EstimatorConfig(
            mode=EstimatorMode(self.mode),
            max_outer_iterations=self.max_outer_iterations,
            max_inner_iterations=self.max_inner_iterations,
            tolerance=self.tolerance,
            huber_delta=self.huber_delta,
            imu_huber_delta=self.imu_huber_delta,
            logical_huber_delta=self.logical_huber_delta,
            point_variance=self.point_variance,
            logical_weight=self.logical_weight,
            logical_sigmas=self.logical_sigmas,
            neighbors=self.neighbors,
            min_neighbors=self.min_neighbors,
            min_associations=self.min_associations,
            max_point_to_plane=self.max_point_to_plane,
            undistortion=UndistortionMode(self.undistort),
            reundistort_each_iteration=self.reundistort_each_iteration,
            point_weight_mode=PointWeightMode(self.point_weight),
        )

    def noise_model(self) -> ImuNoiseModel:
        return ImuNoiseModel(
            accel_noise=self.accel_noise,
            gyro_noise=self.gyro_noise,
            accel_bias_walk=self.accel_bias_walk,
            gyro_bias_walk=self.gyro_bias_walk,
            gravity_norm=self.gravity_norm,
        )

    def gravity(self) -> np.ndarray:
        return np.array([0.0, 0.0, self.gravity_norm])

    def extrinsic(self) -> Pose:
        """IMU-from-LiDAR transform"""
        return Pose(Rotation.from_xyzw(self.extrinsic_rotation), np.array(self.extrinsic_translation))

    def trajectory_spec(self) -> TrajectorySpec:
        return TrajectorySpec(
            kind=TrajectoryKind(self.trajectory),
            duration=self.duration,
            radius=self.radius,
            speed=self.speed,
            lead_in=self.lead_in,
            ramp=self.ramp,
            seed=self.seed,
        )

    def scan_pattern(self) -> ScanPattern:
        return ScanPattern(rings=self.rings, azimuth_steps=self.azimuth_steps)

    def bias_spec(self) -> BiasSpec:
        return BiasSpec(accel=self.accel_bias_init, gyro=self.gyro_bias_init)


def _parse(kind, text: str, key: str):
    text = text.strip()
    try:
        if kind in (bool, "bool"):
            lowered = text.lower()
            if lowered not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(text)
            return lowered in ("true", "1", "yes")
        if kind in (int, "int"):
            return int(text)
        if kind in (float, "float"):
            return float(text)
        if kind in (str, "str"):
            return text
        if kind in (Optional[float], "Optional[float]"):
            return None if text.lower() in ("none", "off", "") else float(text)
        # tuples of floats
        parts = text.replace(",", " ").split()
        expected = str(kind).count("float")
        if len(parts) != expected:
            raise ValueError(f"expected {expected} numbers")
        return tuple(float(p) for p in parts)
    except ValueError as e:
        raise UsageError(f"Invalid value for {key}: '{text}' ({e})")


def _render(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return " ".join(repr(float(v)) for v in value)
    return str(value)
