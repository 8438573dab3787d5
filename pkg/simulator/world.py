from dataclasses import dataclass, field
from typing import List

import numpy as np


@dataclass(frozen=True, eq=False)
class Plane:
    """Bounded rectangle nᵀx + d = 0 with in-plane axes u, v and half extents"""

    normal: np.ndarray
    center: np.ndarray
    u_axis: np.ndarray
    half_u: float
    half_v: float
    name: str = ""

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float).reshape(3)
        n = n / np.linalg.norm(n)
        u = np.asarray(self.u_axis, dtype=float).reshape(3)
        u = u - (u @ n) * n
        if np.linalg.norm(u) < 1e-9:
            raise ValueError(f"Plane {self.name}: u axis parallel to the normal")
        if not (self.half_u > 0.0 and self.half_v > 0.0):
            raise ValueError(f"Plane {self.name}: extents must be positive")
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "u_axis", u / np.linalg.norm(u))
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float).reshape(3))

    @property
    def v_axis(self) -> np.ndarray:
        return np.cross(self.normal, self.u_axis)

    @property
    def offset(self) -> float:
        return float(-self.normal @ self.center)

    def distance(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points, dtype=float) @ self.normal + self.offset

    def contains(self, points: np.ndarray, tolerance: float = 1e-9) -> np.ndarray:
        """Mask of in-plane points that fall inside the rectangle"""
        rel = np.asarray(points, dtype=float) - self.center
        return (np.abs(rel @ self.u_axis) <= self.half_u + tolerance) & (
            np.abs(rel @ self.v_axis) <= self.half_v + tolerance
        )


@dataclass
class WorldModel:
    planes: List[Plane] = field(default_factory=list)
    gravity: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 9.81]))

    def distance_to_nearest(self, points: np.ndarray) -> np.ndarray:
        """Unsigned distance of each point to the closest plane it lies within"""
        points = np.asarray(points, dtype=float).reshape(-1, 3)
        best = np.full(points.shape[0], np.inf)
        for plane in self.planes:
            d = np.abs(plane.distance(points))
            inside = plane.contains(points - np.outer(plane.distance(points), plane.normal))
            best = np.where(inside, np.minimum(best, d), best)
        return best


def default_world(gravity_norm: float = 9.81) -> WorldModel:
    """20 m box room (floor, ceiling, four walls) with two interior walls"""
    z_mid, z_half = 1.0, 2.5
    x_axis, y_axis, z_axis = np.eye(3)
    planes = [
        Plane(z_axis, (0.0, 5.0, -1.5), x_axis, 10.0, 10.0, "floor"),
        Plane(-z_axis, (0.0, 5.0, 3.5), x_axis, 10.0, 10.0, "ceiling"),
        Plane(x_axis, (-10.0, 5.0, z_mid), y_axis, 10.0, z_half, "west"),
        Plane(-x_axis, (10.0, 5.0, z_mid), y_axis, 10.0, z_half, "east"),
        Plane(y_axis, (0.0, -5.0, z_mid), x_axis, 10.0, z_half, "south"),
        Plane(-y_axis, (0.0, 15.0, z_mid), x_axis, 10.0, z_half, "north"),
        Plane(x_axis, (7.0, 5.0, z_mid), y_axis, 3.0, z_half, "partition_east"),
        Plane(y_axis, (-4.0, 12.0, z_mid), x_axis, 2.0, z_half, "partition_north"),
    ]
    return WorldModel(planes=planes, gravity=np.array([0.0, 0.0, gravity_norm]))


def raycast(world: WorldModel, origins: np.ndarray, directions: np.ndarray,
            max_range: float = 100.0) -> np.ndarray:
    """Range to the first plane hit along each ray, inf on a miss"""
    origins = np.broadcast_to(np.asarray(origins, dtype=float), np.shape(directions))
    directions = np.asarray(directions, dtype=float)
    best = np.full(directions.shape[0], np.inf)
    for plane in world.planes:
        denom = directions @ plane.normal
        with np.errstate(divide="ignore", invalid="ignore"):
            ranges = -(origins @ plane.normal + plane.offset) / denom
        ok = (np.abs(denom) > 1e-12) & (ranges > 0.0) & (ranges <= max_range)
        hits = origins + np.where(ok, ranges, 0.0)[:, None] * directions
        ok &= plane.contains(hits)
        best = np.where(ok & (ranges < best), ranges, best)
    return best
