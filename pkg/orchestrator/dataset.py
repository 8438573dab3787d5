"""
On-disk dataset layout shared by the simulator and recorded data:

    imu.csv              t,ax,ay,az,gx,gy,gz
    sweeps/NNNNNN.csv    '# t_begin=<s> t_end=<s>' then t,x,y,z per point (sensor frame)
    gt.txt               timestamp tx ty tz qx qy qz qw         (optional)
    gt_velocity.csv      t,vx,vy,vz,speed                       (optional)
    config.txt           run configuration used to generate it  (optional)
"""

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np

from errors import AlignmentError, FileFormatError
from evaluation import Trajectory, read_trajectory, write_states
from geometry import NavState
from inertial import ImuSample
from preprocessing import Sweep

logger = logging.getLogger(__name__)

IMU_FILE = "imu.csv"
SWEEP_DIR = "sweeps"
GT_FILE = "gt.txt"
GT_VELOCITY_FILE = "gt_velocity.csv"
CONFIG_FILE = "config.txt"

_BOUNDS = re.compile(r"#\s*t_begin=(\S+)\s+t_end=(\S+)")


@dataclass
class Dataset:
    root: Path
    imu: List[ImuSample]
    sweeps: List[Sweep]
    ground_truth: Optional[Trajectory] = None
    extras: dict = field(default_factory=dict)


def _write_lines(path: Path, header: str, rows: np.ndarray, fmt: str = "{:.9f}"):
    lines = [header]
    for row in rows:
        lines.append(",".join(fmt.format(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def write_sweep(path: Path, sweep: Sweep):
    rows = np.column_stack([sweep.timestamps, sweep.points])
    lines = [f"# t_begin={sweep.t_begin:.9f} t_end={sweep.t_end:.9f}", "t,x,y,z"]
    lines.extend(",".join(f"{v:.9f}" for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


def write_dataset(root, imu: List[ImuSample], sweeps: List[Sweep], ground_truth: List[NavState] = None,
                  config_text: Optional[str] = None) -> Path:
    root = Path(root)
    try:
        (root / SWEEP_DIR).mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise FileFormatError(f"Cannot create dataset directory {root}: {e}")

    imu_rows = np.array([[s.timestamp, *s.accel, *s.gyro] for s in imu])
    _write_lines(root / IMU_FILE, "t,ax,ay,az,gx,gy,gz", imu_rows)
    for sweep in sweeps:
        write_sweep(root / SWEEP_DIR / f"{sweep.index:06d}.csv", sweep)
    if ground_truth:
        write_states(root / GT_FILE, ground_truth)
        velocity_rows = np.array([[s.timestamp, *s.velocity, np.linalg.norm(s.velocity)] for s in ground_truth])
        _write_lines(root / GT_VELOCITY_FILE, "t,vx,vy,vz,speed", velocity_rows)
    if config_text is not None:
        (root / CONFIG_FILE).write_text(config_text)
    logger.info(f"Dataset written to {root}: {len(sweeps)} sweeps, {len(imu)} IMU samples")
    return root


def _load_csv(path: Path, columns: int):
    """Numeric rows of a headed CSV plus its '#' comment lines"""
    try:
        lines = path.read_text().splitlines()
    except OSError as e:
        raise FileFormatError(f"Cannot read {path}: {e}")
    comments = [line for line in lines if line.startswith("#")]
    body = [line for line in lines if line.strip() and not line.startswith("#")]
    if not body:
        raise FileFormatError(f"{path}: missing header")
    try:
        data = np.loadtxt(body[1:], delimiter=",", ndmin=2) if len(body) > 1 else np.zeros((0, columns))
    except ValueError as e:
        raise FileFormatError(f"{path}: {e}")
    if data.shape[1] != columns:
        raise FileFormatError(f"{path}: expected {columns} columns, found {data.shape[1]}")
    return data, comments


def read_imu(path) -> List[ImuSample]:
    path = Path(path)
    if not path.exists():
        raise AlignmentError(f"IMU log {path} not found; sweeps cannot be aligned")
    data, _ = _load_csv(path, 7)
    if data.shape[0] > 1 and np.any(np.diff(data[:, 0]) <= 0.0):
        raise FileFormatError(f"{path}: IMU timestamps are not strictly increasing")
    return [ImuSample(row[1:4], row[4:7], row[0]) for row in data]


def read_sweep(path, index: int = 0) -> Sweep:
    path = Path(path)
    data, comments = _load_csv(path, 4)
    bounds = next((_BOUNDS.match(c) for c in comments if _BOUNDS.match(c)), None)
    if bounds is not None:
        t_begin, t_end = float(bounds.group(1)), float(bounds.group(2))
    elif data.shape[0] > 1:
        t_begin, t_end = float(data[:, 0].min()), float(data[:, 0].max())
    else:
        raise FileFormatError(f"{path}: sweep boundaries unknown")
    try:
        return Sweep(data[:, 1:4], data[:, 0], t_begin, t_end, index)
    except ValueError as e:
        raise FileFormatError(f"{path}: {e}")


def read_dataset(root) -> Dataset:
    root = Path(root)
    if not root.is_dir():
        raise FileFormatError(f"Dataset directory {root} does not exist")
    imu = read_imu(root / IMU_FILE)
    sweep_paths = sorted((root / SWEEP_DIR).glob("*.csv"))
    if not sweep_paths:
        raise FileFormatError(f"No sweeps found under {root / SWEEP_DIR}")
    sweeps = [read_sweep(p, int(p.stem) if p.stem.isdigit() else i) for i, p in enumerate(sweep_paths)]
    ground_truth = read_trajectory(root / GT_FILE) if (root / GT_FILE).exists() else None
    extras = {}
    if (root / CONFIG_FILE).exists():
        extras["config_text"] = (root / CONFIG_FILE).read_text()
    logger.info(f"Loaded dataset {root}: {len(sweeps)} sweeps, {len(imu)} IMU samples")
    return Dataset(root=root, imu=imu, sweeps=sweeps, ground_truth=ground_truth, extras=extras)
