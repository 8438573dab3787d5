# test_estimator.py

import numpy as np
import pytest

from errors import DegenerateGeometryError, TimestampMismatchError
from estimators import (
    ESTIMATORS,
    LOGICAL_SIGMAS,
    EstimatorConfig,
    EstimatorMode,
    LevenbergMarquardt,
    ResidualBlock,
    SemiElasticEstimator,
    TraditionalEstimator,
    UndistortionMode,
    create_estimator,
    elastic_point_residuals,
    logical_residual,
    point_residual,
    point_residuals,
)
from estimators.solver import LeastSquaresProblem
from geometry import Pose, boxplus, so3_exp
from inertial import ImuBuffer, integrate
from mapping import PlaneFit, VoxelMap
from preprocessing import downsample, undistort_imu
from simulator import exact_state

GRAVITY = np.array([0.0, 0.0, 9.81])
TEST_SWEEP = 25


def _random_planes(rng, n):
    normals = rng.normal(size=(n, 3))
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    return normals, rng.normal(size=n), rng.uniform(0.5, 2.0, size=n)


def _max_relative_error(analytic, numeric):
    return np.max(np.abs(analytic - numeric)) / max(1.0, np.max(np.abs(numeric)))


# residual families


def test_point_residual_jacobian(make_state, rng, numeric_jacobian):
    for _ in range(20):
        x_e = make_state()
        point = 5.0 * rng.normal(size=3)
        normal = rng.normal(size=3)
        normal /= np.linalg.norm(normal)
        plane = PlaneFit(normal, float(rng.normal()), 0.9, 10, np.zeros(3))
        _, analytic = point_residual(point, plane, x_e, weight=3.0)
        numeric = numeric_jacobian(lambda x: point_residual(point, plane, x, weight=3.0)[0], x_e)
        assert _max_relative_error(analytic, numeric[:, :6]) < 1e-6
        assert np.allclose(numeric[:, 6:], 0.0, atol=1e-9)


def test_vectorized_point_residuals_match_single(make_state, rng):
    x_e = make_state()
    points = 5.0 * rng.normal(size=(8, 3))
    normals, offsets, weights = _random_planes(rng, 8)
    residuals, jacobian = point_residuals(points, normals, offsets, weights, x_e)
    for i in range(8):
        plane = PlaneFit(normals[i], offsets[i], 1.0, 5, np.zeros(3))
        r, J = point_residual(points[i], plane, x_e, weights[i])
        assert residuals[i] == pytest.approx(r, abs=1e-12)
        assert np.allclose(jacobian[i], J[0], atol=1e-12)


def test_elastic_point_jacobians(make_state, rng, numeric_jacobian):
    extrinsic = Pose(so3_exp([0.05, -0.1, 0.2]), np.array([0.3, -0.1, 0.2]))
    for _ in range(10):
        x_b = make_state(timestamp=0.0)
        x_e = boxplus(x_b, 0.2 * rng.normal(size=15)).replace(timestamp=0.1)
        points = 5.0 * rng.normal(size=(6, 3))
        alphas = np.concatenate([[0.0, 1.0], rng.uniform(size=4)])
        normals, offsets, weights = _random_planes(rng, 6)

        def residuals(xb, xe):
            return elastic_point_residuals(points, alphas, normals, offsets, weights, xb, xe, extrinsic,
                                           jacobians=False)[0]

        _, J_b, J_e = elastic_point_residuals(points, alphas, normals, offsets, weights, x_b, x_e, extrinsic)
        numeric_b = numeric_jacobian(lambda x: residuals(x, x_e), x_b)
        numeric_e = numeric_jacobian(lambda x: residuals(x_b, x), x_e)
        assert _max_relative_error(J_b, numeric_b[:, :6]) < 1e-5
        assert _max_relative_error(J_e, numeric_e[:, :6]) < 1e-5


def test_logical_residual_jacobian(make_state, rng, numeric_jacobian):
    for _ in range(10):
        x_prev = make_state(timestamp=1.0)
        x_b = boxplus(x_prev, 0.3 * rng.normal(size=15))
        r, analytic = logical_residual(x_b, x_prev)
        numeric = numeric_jacobian(lambda x: logical_residual(x, x_prev)[0], x_b)
        assert _max_relative_error(analytic, numeric) < 1e-6
        assert np.allclose(logical_residual(x_prev, x_prev)[0], 0.0)


def test_logical_residual_requires_shared_timestamp(make_state):
    x_prev = make_state(timestamp=1.0)
    with pytest.raises(TimestampMismatchError):
        logical_residual(x_prev.replace(timestamp=1.1), x_prev)


# solver


class _LinearProblem(LeastSquaresProblem):
    def __init__(self, A, b):
        self.A, self.b = A, b

    @property
    def dimension(self):
        return self.A.shape[1]

    def evaluate(self, state, jacobians=True):
        return [ResidualBlock("linear", self.A @ state - self.b, self.A if jacobians else None)]

    def retract(self, state, delta):
        return state + delta


def test_solver_reaches_least_squares_solution(rng):
    A = rng.normal(size=(30, 4))
    b = rng.normal(size=30)
    result = LevenbergMarquardt(max_iterations=20, tolerance=1e-10).solve(_LinearProblem(A, b), np.zeros(4))
    assert np.allclose(result.state, np.linalg.lstsq(A, b, rcond=None)[0], atol=1e-8)
    assert result.converged
    assert all(later <= earlier for earlier, later in zip(result.cost_history, result.cost_history[1:]))


def test_huber_cost_is_linear_beyond_delta():
    block = ResidualBlock("point", np.array([0.05, 2.0]), huber_delta=0.1)
    assert block.cost() == pytest.approx(0.05 ** 2 + 2.0 * 0.1 * 2.0 - 0.01)
    assert np.allclose(block.robust_weights(), [1.0, 0.05])
    grouped = ResidualBlock("imu", np.full(4, 0.5), huber_delta=10.0, group_size=2)
    assert grouped.cost() == pytest.approx(1.0)


# per-sweep estimation against a map built from ground truth


@pytest.fixture(scope="module")
def scene(circular_run):
    """Map registered from exact states over the sweeps preceding the test sweep"""
    buffer = ImuBuffer(circular_run.imu)
    spec = circular_run.spec
    voxel_map = VoxelMap(1.0, 20)
    for sweep in circular_run.sweeps[TEST_SWEEP - 10:TEST_SWEEP]:
        reduced = downsample(sweep)
        x_b = exact_state(spec, sweep.t_begin)
        x_e = exact_state(spec, sweep.t_end)
        window = buffer.window(sweep.t_begin, sweep.t_end)
        voxel_map.insert(x_e.pose.apply(undistort_imu(reduced, window, x_b, Pose.identity(), GRAVITY).points))

    sweep = downsample(circular_run.sweeps[TEST_SWEEP])
    window = buffer.window(sweep.t_begin, sweep.t_end)
    return {
        "map": voxel_map,
        "sweep": sweep,
        "window": window,
        "truth_b": exact_state(spec, sweep.t_begin),
        "truth_e": exact_state(spec, sweep.t_end),
    }


def _optimize(scene, mode, x_prev=None, **config):
    estimator = create_estimator(EstimatorConfig(mode=mode, **config))
    x_prev = x_prev or scene["truth_b"]
    pre = integrate(scene["window"], x_prev.accel_bias, x_prev.gyro_bias)
    _, x_e = estimator.predict(x_prev, scene["window"], pre)
    return estimator.optimize(scene["sweep"], scene["map"], x_prev, pre, x_e)


def test_factory_serves_every_mode():
    for mode, cls in ESTIMATORS.items():
        estimator = create_estimator(EstimatorConfig(mode=mode))
        assert isinstance(estimator, cls)
        assert estimator.mode == mode
    assert not TraditionalEstimator().optimizes_begin_state()
    assert SemiElasticEstimator().uses_logical_residual()


@pytest.mark.parametrize("mode", list(EstimatorMode))
def test_every_mode_recovers_the_end_state(scene, mode):
    estimate = _optimize(scene, mode, undistortion=UndistortionMode.IMU)
    assert np.linalg.norm(estimate.x_e.translation - scene["truth_e"].translation) < 0.01
    assert estimate.x_e.rotation.angle_to(scene["truth_e"].rotation) < 1e-3
    assert estimate.associations >= 10
    for history in estimate.cost_history:
        assert all(later <= earlier for earlier, later in zip(history, history[1:]))
    assert set(estimate.cost_breakdown) >= {"point", "imu"}


def test_elasticity_absorbs_corrupted_prior(scene):
    corrupted = scene["truth_b"].replace(translation=scene["truth_b"].translation + np.array([0.2, 0.0, 0.0]))
    semi = _optimize(scene, EstimatorMode.SEMI_ELASTIC, x_prev=corrupted)
    traditional = _optimize(scene, EstimatorMode.TRADITIONAL, x_prev=corrupted)

    truth = scene["truth_b"].translation
    assert np.linalg.norm(semi.x_b.translation - truth) < np.linalg.norm(corrupted.translation - truth)
    assert np.array_equal(traditional.x_b.translation, corrupted.translation)
    assert np.array_equal(traditional.x_b.rotation.quaternion, corrupted.rotation.quaternion)
    assert np.array_equal(traditional.x_b.velocity, corrupted.velocity)


def test_huge_logical_weight_degenerates_to_traditional(scene):
    semi = _optimize(scene, EstimatorMode.SEMI_ELASTIC, undistortion=UndistortionMode.IMU, logical_weight=1e12,
                     logical_sigmas=(1.0, 1.0, 1.0, 1.0, 1.0))
    traditional = _optimize(scene, EstimatorMode.TRADITIONAL, undistortion=UndistortionMode.IMU)
    assert np.linalg.norm(semi.x_e.translation - traditional.x_e.translation) < 1e-6
    assert np.linalg.norm(semi.x_b.translation - scene["truth_b"].translation) < 1e-6


def test_empty_map_falls_back_to_prediction(scene):
    estimator = create_estimator(EstimatorConfig())
    x_prev = scene["truth_b"]
    pre = integrate(scene["window"], x_prev.accel_bias, x_prev.gyro_bias)
    _, x_pred = estimator.predict(x_prev, scene["window"], pre)
    with pytest.raises(DegenerateGeometryError) as info:
        estimator.optimize(scene["sweep"], VoxelMap(), x_prev, pre, x_pred)
    fallback = info.value.fallback
    assert fallback.fallback and fallback.fallback_reason
    assert fallback.x_e.isclose(x_pred, atol=0.0)
    assert fallback.x_b is x_prev


def test_optimize_rejects_misaligned_sweep(scene):
    estimator = create_estimator(EstimatorConfig())
    x_prev = scene["truth_b"].replace(timestamp=scene["truth_b"].timestamp - 0.05)
    pre = integrate(scene["window"], np.zeros(3), np.zeros(3))
    with pytest.raises(TimestampMismatchError):
        estimator.optimize(scene["sweep"], scene["map"], x_prev, pre)


def test_config_validation():
    with pytest.raises(ValueError):
        EstimatorConfig(point_variance=0.0).validate()
    with pytest.raises(ValueError):
        EstimatorConfig(logical_sigmas=(0.01, 0.0, 0.01, 1e-3, 1e-4)).validate()
    with pytest.raises(ValueError):
        EstimatorConfig(neighbors=3, min_neighbors=5).validate()


def test_logical_information_follows_block_sigmas():
    estimator = SemiElasticEstimator(EstimatorConfig(logical_weight=4.0))
    information = estimator.logical_whitening.T @ estimator.logical_whitening
    expected = 4.0 / np.repeat(np.asarray(LOGICAL_SIGMAS), 3) ** 2
    assert np.allclose(information, np.diag(expected), rtol=1e-12)


def test_map_points_use_the_optimizer_motion_model(scene, world):
    estimator = create_estimator(EstimatorConfig(undistortion=UndistortionMode.IMU))
    truth_b = scene["truth_b"]
    pre = integrate(scene["window"], truth_b.accel_bias, truth_b.gyro_bias)
    placed = estimator.map_points(scene["sweep"], pre, truth_b, scene["truth_e"])
    assert placed.shape == scene["sweep"].points.shape
    assert world.distance_to_nearest(placed).max() < 1e-6
