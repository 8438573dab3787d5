import itertools
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Tuple

import numpy as np

from errors import DegenerateFitError
from preprocessing.downsample import voxel_keys

DEFAULT_VOXEL_SIZE = 1.0
DEFAULT_CAPACITY = 20
DEFAULT_NEIGHBORS = 20
MIN_PLANE_POINTS = 5
DEGENERACY_GAP = 1e-12
DEFAULT_PRUNE_DISTANCE = 500.0

VoxelKey = Tuple[int, int, int]


@dataclass(frozen=True)
class InsertionReport:
    added: int
    rejected: int


@dataclass(frozen=True, eq=False)
class PlaneFit:
    """Local plane nᵀx + d = 0 fitted to map neighbors"""

    normal: np.ndarray
    offset: float
    planarity: float
    count: int
    centroid: np.ndarray

    def distance(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points, dtype=float) @ self.normal + self.offset


def _lexicographic_sign(normal: np.ndarray) -> np.ndarray:
    for component in normal:
        if abs(component) > DEGENERACY_GAP:
            return normal if component > 0.0 else -normal
    return normal


def fit_plane(points: np.ndarray, query: Optional[np.ndarray] = None,
              min_points: int = MIN_PLANE_POINTS) -> PlaneFit:
    """Smallest-eigenvector plane with the a2D planarity score"""
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    if points.shape[0] < min_points:
        raise DegenerateFitError(f"Plane fit needs {min_points} points, got {points.shape[0]}")
    centroid = points.mean(axis=0)
    centered = points - centroid
    eigenvalues, eigenvectors = np.linalg.eigh(centered.T @ centered / points.shape[0])
    if eigenvalues[1] - eigenvalues[0] < DEGENERACY_GAP:
        raise DegenerateFitError(f"Degenerate neighbor spectrum {eigenvalues}")

    normal = eigenvectors[:, 0]
    if query is not None and np.dot(normal, np.asarray(query, dtype=float) - centroid) > 0.0:
        normal = -normal
    elif query is None:
        normal = _lexicographic_sign(normal)
    roots = np.sqrt(np.clip(eigenvalues, 0.0, None))
    planarity = float((roots[1] - roots[0]) / roots[2]) if roots[2] > 0.0 else 0.0
    return PlaneFit(
        normal=normal,
        offset=float(-normal @ centroid),
        planarity=planarity,
        count=points.shape[0],
        centroid=centroid,
    )


def fit_planes(neighbors: np.ndarray, counts: np.ndarray, queries: Optional[np.ndarray] = None,
               min_points: int = MIN_PLANE_POINTS):
    """Batched fit_plane over padded (n, k, 3) neighbor sets.

    Returns (normals, offsets, planarity, valid); rows that are too small or
    degenerate are flagged invalid instead of raising.
    """
    n, k, _ = neighbors.shape
    normals = np.zeros((n, 3))
    offsets = np.zeros(n)
    planarity = np.zeros(n)
    valid = counts >= min_points
    if not np.any(valid):
        return normals, offsets, planarity, valid

    rows = np.flatnonzero(valid)
    pts = neighbors[rows]
    mask = (np.arange(k)[None, :] < counts[rows, None]).astype(float)
    m = counts[rows].astype(float)
    centroids = np.einsum("nk,nkd->nd", mask, pts) / m[:, None]
    centered = (pts - centroids[:, None, :]) * mask[:, :, None]
    scatter = np.einsum("nki,nkj->nij", centered, centered) / m[:, None, None]
    eigenvalues, eigenvectors = np.linalg.eigh(scatter)
    normal = eigenvectors[:, :, 0]

    if queries is not None:
        flip = np.einsum("nd,nd->n", normal, queries[rows] - centroids) > 0.0
    else:
        first = np.argmax(np.abs(normal) > DEGENERACY_GAP, axis=1)
        flip = normal[np.arange(len(rows)), first] < 0.0
    normal[flip] *= -1.0

    roots = np.sqrt(np.clip(eigenvalues, 0.0, None))
    with np.errstate(divide="ignore", invalid="ignore"):
        score = np.where(roots[:, 2] > 0.0, (roots[:, 1] - roots[:, 0]) / roots[:, 2], 0.0)

    normals[rows] = normal
    offsets[rows] = -np.einsum("nd,nd->n", normal, centroids)
    planarity[rows] = score
    valid[rows] = (eigenvalues[:, 1] - eigenvalues[:, 0]) >= DEGENERACY_GAP
    return normals, offsets, planarity, valid


class VoxelMap:
    """World-frame point map hashed into fixed-capacity voxels"""

    def __init__(self, voxel_size: float = DEFAULT_VOXEL_SIZE, capacity: int = DEFAULT_CAPACITY,
                 search_window: int = 1):
        if not voxel_size > 0.0:
            raise ValueError(f"Voxel size must be positive, got {voxel_size}")
        if capacity < 1 or search_window < 0:
            raise ValueError("Voxel capacity must be >= 1 and search window >= 0")
        self.voxel_size = float(voxel_size)
        self.capacity = int(capacity)
        self.search_window = int(search_window)
        self.voxels: Dict[VoxelKey, np.ndarray] = {}
        self.logger = logging.getLogger(__name__)
        span = range(-self.search_window, self.search_window + 1)
        self._offsets = [tuple(o) for o in itertools.product(span, span, span)]

    def __len__(self) -> int:
        return self.num_points

    @property
    def num_points(self) -> int:
        return sum(block.shape[0] for block in self.voxels.values())

    @property
    def num_voxels(self) -> int:
        return len(self.voxels)

    def key_of(self, point: np.ndarray) -> VoxelKey:
        return tuple(int(c) for c in voxel_keys(np.asarray(point).reshape(1, 3), self.voxel_size)[0])

    def insert(self, points: np.ndarray) -> InsertionReport:
        """Append points to their voxels; points landing in a full voxel are rejected"""
        points = np.asarray(points, dtype=float).reshape(-1, 3)
        if points.shape[0] == 0:
            return InsertionReport(0, 0)
        if not np.all(np.isfinite(points)):
            raise ValueError("Cannot insert non-finite points into the map")

        keys = voxel_keys(points, self.voxel_size)
        unique, inverse = np.unique(keys, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        order = np.argsort(inverse, kind="stable")
        bounds = np.searchsorted(inverse[order], np.arange(len(unique) + 1))

        added = 0
        for group, raw_key in enumerate(unique):
            key = tuple(int(c) for c in raw_key)
            members = order[bounds[group]:bounds[group + 1]]
            stored = self.voxels.get(key)
            free = self.capacity - (0 if stored is None else stored.shape[0])
            if free <= 0:
                continue
            accepted = points[members[:free]]
            self.voxels[key] = accepted.copy() if stored is None else np.vstack([stored, accepted])
            added += accepted.shape[0]

        report = InsertionReport(added, points.shape[0] - added)
        self.logger.debug(f"Inserted {report.added} points, rejected {report.rejected}; map holds {self.num_points}")
        return report

    def _candidates(self, key: VoxelKey) -> np.ndarray:
        blocks = []
        for dx, dy, dz in self._offsets:
            block = self.voxels.get((key[0] + dx, key[1] + dy, key[2] + dz))
            if block is not None:
                blocks.append(block)
        if not blocks:
            return np.zeros((0, 3))
        return np.vstack(blocks)

    def neighbors(self, query: np.ndarray, k: int = DEFAULT_NEIGHBORS) -> np.ndarray:
        """Up to k nearest stored points from the query voxel block, nearest first"""
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        query = np.asarray(query, dtype=float).reshape(3)
        candidates = self._candidates(self.key_of(query))
        if candidates.shape[0] == 0:
            return candidates
        sq = np.sum((candidates - query) ** 2, axis=1)
        return candidates[np.argsort(sq, kind="stable")[:k]]

    def neighbors_batch(self, queries: np.ndarray, k: int = DEFAULT_NEIGHBORS) -> Tuple[np.ndarray, np.ndarray]:
        """neighbors() for many queries at once: padded (n, k, 3) array and per-query counts"""
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        queries = np.asarray(queries, dtype=float).reshape(-1, 3)
        result = np.zeros((queries.shape[0], k, 3))
        counts = np.zeros(queries.shape[0], dtype=int)
        if queries.shape[0] == 0 or not self.voxels:
            return result, counts

        keys = voxel_keys(queries, self.voxel_size)
        unique, inverse = np.unique(keys, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        for group, raw_key in enumerate(unique):
            candidates = self._candidates(tuple(int(c) for c in raw_key))
            if candidates.shape[0] == 0:
                continue
            members = np.flatnonzero(inverse == group)
            sq = np.sum((candidates[None, :, :] - queries[members, None, :]) ** 2, axis=2)
            nearest = np.argsort(sq, axis=1, kind="stable")[:, :k]
            taken = nearest.shape[1]
            result[members, :taken] = candidates[nearest]
            counts[members] = taken
        return result, counts

    def prune(self, center: np.ndarray, max_dist: float = DEFAULT_PRUNE_DISTANCE) -> int:
        """Drop every voxel whose center lies farther than max_dist from center"""
        if not max_dist > 0.0:
            raise ValueError(f"max_dist must be positive, got {max_dist}")
        if not self.voxels:
            return 0
        center = np.asarray(center, dtype=float).reshape(3)
        keys = list(self.voxels)
        centers = (np.array(keys, dtype=float) + 0.5) * self.voxel_size
        far = np.linalg.norm(centers - center, axis=1) > max_dist
        for index in np.flatnonzero(far):
            del self.voxels[keys[index]]
        removed = int(np.count_nonzero(far))
        if removed:
            self.logger.debug(f"Pruned {removed} voxels farther than {max_dist:g} m")
        return removed

    def point_cloud(self) -> np.ndarray:
        if not self.voxels:
            return np.zeros((0, 3))
        return np.vstack(list(self.voxels.values()))

    def dump(self, path) -> Path:
        """Write the map as 'x y z' lines"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w") as handle:
            for x, y, z in self.point_cloud():
                handle.write(f"{x:.6f} {y:.6f} {z:.6f}\n")
        self.logger.info(f"Map with {self.num_points} points written to {path}")
        return path
