from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from errors import FileFormatError
from geometry import NavState
from .metrics import ate_rmse, velocity_smoothness, zigzag_score
from .trajectory import Trajectory

REPORT_KEYS = ("ate_rmse", "velocity_smoothness", "zigzag_score", "samples")


def consistency_report(est: Trajectory, gt: Trajectory, align: bool = True,
                       speeds: Optional[np.ndarray] = None) -> Dict[str, float]:
    """ATE plus both local-consistency diagnostics of an estimated trajectory"""
    return {
        "ate_rmse": ate_rmse(est, gt, align=align),
        "velocity_smoothness": velocity_smoothness(est if speeds is None else speeds),
        "zigzag_score": zigzag_score(est),
        "samples": len(est),
    }


def _format_value(value) -> str:
    if isinstance(value, (float, np.floating)):
        return f"{value:.6f}"
    return str(value)


def format_report(metrics: Dict[str, object]) -> str:
    """key=value lines, one metric per line"""
    return "\n".join(f"{key}={_format_value(value)}" for key, value in metrics.items())


def format_table(rows: Sequence[Dict[str, object]], keys: Iterable[str] = ("mode",) + REPORT_KEYS) -> str:
    """Whitespace-separated table with a header row"""
    keys = list(keys)
    lines = [" ".join(keys)]
    for row in rows:
        lines.append(" ".join(_format_value(row.get(key, "")) for key in keys))
    return "\n".join(lines)


def speed_csv(states: Sequence[NavState], path) -> Path:
    """Per-sweep 't,speed' CSV for plotting"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines: List[str] = ["t,speed"]
    for state in states:
        lines.append(f"{state.timestamp:.9f},{np.linalg.norm(state.velocity):.9f}")
    path.write_text("\n".join(lines) + "\n")
    return path


def read_speed_csv(path) -> np.ndarray:
    """(n, 2) array of t, speed"""
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as e:
        raise FileFormatError(f"Cannot read speed file {path}: {e}")
    if data.shape[1] != 2:
        raise FileFormatError(f"{path}: expected 't,speed' columns")
    return data
