# test_voxel_map.py

import numpy as np
import pytest

from errors import DegenerateFitError
from mapping import VoxelMap, fit_plane, fit_planes
from preprocessing import voxel_keys


def _brute_force(points, query, voxel_size, k):
    keys = voxel_keys(points, voxel_size)
    center = voxel_keys(query.reshape(1, 3), voxel_size)[0]
    inside = np.all(np.abs(keys - center) <= 1, axis=1)
    candidates = points[inside]
    order = np.argsort(np.sum((candidates - query) ** 2, axis=1), kind="stable")
    return candidates[order[:k]]


def test_capacity_never_exceeded(rng):
    voxel_map = VoxelMap(voxel_size=1.0, capacity=20)
    operations = 0
    while operations < 100_000:
        if rng.uniform() < 0.05:
            voxel_map.prune(rng.uniform(-3.0, 3.0, size=3), max_dist=3.0)
            operations += 1
        else:
            batch = rng.uniform(-3.0, 3.0, size=(rng.integers(1, 100), 3))
            report = voxel_map.insert(batch)
            assert report.added + report.rejected == batch.shape[0]
            operations += batch.shape[0]
        assert max((block.shape[0] for block in voxel_map.voxels.values()), default=0) <= 20
    assert voxel_map.num_points == voxel_map.point_cloud().shape[0]


def test_full_voxel_rejects_new_points():
    voxel_map = VoxelMap(voxel_size=1.0, capacity=3)
    report = voxel_map.insert(np.full((5, 3), 0.5))
    assert (report.added, report.rejected) == (3, 2)
    assert voxel_map.insert(np.array([[0.2, 0.2, 0.2]])).rejected == 1
    assert voxel_map.num_voxels == 1


def test_neighbors_match_brute_force(rng):
    voxel_map = VoxelMap(voxel_size=1.0, capacity=1000)
    points = rng.uniform(-4.0, 4.0, size=(3000, 3))
    voxel_map.insert(points)
    queries = rng.uniform(-4.5, 4.5, size=(1000, 3))
    batch, counts = voxel_map.neighbors_batch(queries, k=20)
    for query, found, count in zip(queries, batch, counts):
        expected = _brute_force(points, query, 1.0, 20)
        single = voxel_map.neighbors(query, k=20)
        assert count == expected.shape[0] == single.shape[0]
        assert np.allclose(np.sort(np.linalg.norm(single - query, axis=1)),
                           np.linalg.norm(expected - query, axis=1))
        assert np.allclose(found[:count], single)


def test_empty_map_has_no_neighbors():
    voxel_map = VoxelMap()
    assert voxel_map.neighbors(np.zeros(3)).shape == (0, 3)
    neighbors, counts = voxel_map.neighbors_batch(np.zeros((4, 3)))
    assert neighbors.shape == (4, 20, 3)
    assert np.all(counts == 0)


def test_insert_rejects_non_finite():
    with pytest.raises(ValueError):
        VoxelMap().insert(np.array([[0.0, np.inf, 0.0]]))


def test_prune_drops_far_voxels():
    voxel_map = VoxelMap(voxel_size=1.0)
    voxel_map.insert(np.array([[0.5, 0.5, 0.5], [100.5, 0.5, 0.5]]))
    assert voxel_map.prune(np.zeros(3), max_dist=10.0) == 1
    assert voxel_map.key_of(voxel_map.point_cloud()[0]) == (0, 0, 0)


def test_fit_plane_orients_normal_towards_query(rng):
    xy = rng.uniform(-1.0, 1.0, size=(30, 2))
    points = np.column_stack([xy, np.full(30, 2.0)])
    plane = fit_plane(points, query=np.array([0.0, 0.0, 3.0]))
    assert np.allclose(plane.normal, [0.0, 0.0, -1.0], atol=1e-9)
    assert plane.distance(np.array([0.0, 0.0, 3.0])) == pytest.approx(-1.0)
    assert 0.5 < plane.planarity <= 1.0
    assert plane.count == 30


def test_fit_plane_without_query_uses_deterministic_sign(rng):
    points = np.column_stack([rng.uniform(-1.0, 1.0, size=(20, 2)), np.zeros(20)])
    assert np.allclose(fit_plane(points).normal, [0.0, 0.0, 1.0], atol=1e-9)


def test_fit_plane_degenerate_inputs():
    line = np.column_stack([np.linspace(0.0, 1.0, 10), np.zeros(10), np.zeros(10)])
    with pytest.raises(DegenerateFitError):
        fit_plane(line)
    with pytest.raises(DegenerateFitError):
        fit_plane(np.eye(3))


def test_batched_fits_agree_with_single(rng):
    sets = []
    for _ in range(5):
        normal = rng.normal(size=3)
        normal /= np.linalg.norm(normal)
        basis = np.linalg.svd(normal.reshape(1, 3))[2][1:]
        sets.append(rng.uniform(-1.0, 1.0, size=(20, 2)) @ basis + 0.01 * rng.normal(size=(20, 3)))
    neighbors = np.array(sets)
    counts = np.array([20, 20, 4, 20, 12])
    queries = rng.normal(size=(5, 3))
    normals, offsets, planarity, valid = fit_planes(neighbors, counts, queries, min_points=5)
    assert list(valid) == [True, True, False, True, True]
    for i in np.flatnonzero(valid):
        single = fit_plane(neighbors[i, :counts[i]], query=queries[i])
        assert np.allclose(normals[i], single.normal, atol=1e-9)
        assert offsets[i] == pytest.approx(single.offset, abs=1e-9)
        assert planarity[i] == pytest.approx(single.planarity, abs=1e-9)


def test_dump_writes_one_line_per_point(tmp_path):
    voxel_map = VoxelMap()
    voxel_map.insert(np.array([[0.1, 0.2, 0.3], [5.0, 5.0, 5.0]]))
    lines = voxel_map.dump(tmp_path / "map.txt").read_text().splitlines()
    assert sorted(lines) == ["0.100000 0.200000 0.300000", "5.000000 5.000000 5.000000"]
