# test_geometry.py

import numpy as np
import pytest

from geometry import (
    NavState,
    Pose,
    Rotation,
    boxminus,
    boxplus,
    interpolate_pose,
    right_jacobian,
    right_jacobian_inverse,
    so3_exp,
    so3_log,
)
from geometry.rotation import batch_right_jacobians


def test_exp_log_roundtrip(rng):
    for _ in range(50):
        omega = rng.normal(size=3)
        omega *= rng.uniform(0.0, 3.0) / np.linalg.norm(omega)
        assert np.allclose(so3_log(so3_exp(omega)), omega, atol=1e-9)


def test_tiny_angles_stay_accurate():
    omega = np.array([1e-10, -2e-10, 3e-10])
    assert np.allclose(so3_log(so3_exp(omega)), omega, rtol=1e-6, atol=0.0)
    assert so3_exp(np.zeros(3)).isclose(Rotation.identity())


def test_half_turn_log_has_length_pi():
    rotation = so3_exp([0.0, 0.0, np.pi])
    assert np.allclose(so3_log(rotation), [0.0, 0.0, np.pi], atol=1e-9)


def test_quaternions_are_canonical():
    q = Rotation(np.array([-0.5, 0.5, -0.5, 0.5]))
    assert q.w >= 0.0
    assert q.isclose(Rotation(np.array([0.5, -0.5, 0.5, -0.5])))


def test_matrix_agrees_with_scipy(rng):
    rotation = so3_exp(rng.normal(size=3))
    assert np.allclose(rotation.matrix, rotation.to_scipy().as_matrix(), atol=1e-12)
    assert np.allclose(rotation.matrix @ rotation.matrix.T, np.eye(3), atol=1e-12)


def test_right_jacobian_first_order(rng):
    phi = rng.normal(size=3)
    delta = 1e-6 * rng.normal(size=3)
    lhs = so3_exp(phi + delta)
    rhs = so3_exp(phi) * so3_exp(right_jacobian(phi) @ delta)
    assert lhs.angle_to(rhs) < 1e-10
    assert np.allclose(right_jacobian(phi) @ right_jacobian_inverse(phi), np.eye(3), atol=1e-9)


def test_batch_right_jacobians_match_single(rng):
    phis = np.vstack([rng.normal(size=(4, 3)), np.zeros((1, 3)), [[1e-7, 0.0, 0.0]]])
    batch = batch_right_jacobians(phis)
    for phi, jac in zip(phis, batch):
        assert np.allclose(jac, right_jacobian(phi), atol=1e-10)


def test_pose_compose_and_inverse(rng):
    a = Pose(so3_exp(rng.normal(size=3)), rng.normal(size=3))
    b = Pose(so3_exp(rng.normal(size=3)), rng.normal(size=3))
    points = rng.normal(size=(5, 3))
    assert np.allclose((a * b).apply(points), a.apply(b.apply(points)), atol=1e-12)
    assert (a * a.inverse()).isclose(Pose.identity(), atol=1e-12)
    assert np.allclose(Pose.from_matrix(a.as_matrix()).as_matrix(), a.as_matrix(), atol=1e-12)


def test_interpolate_pose_endpoints_and_midpoint():
    a = Pose.identity()
    b = Pose(so3_exp([0.0, 0.0, 1.0]), np.array([2.0, 0.0, 0.0]))
    assert interpolate_pose(a, b, 0.0) is a
    assert interpolate_pose(a, b, 1.0) is b
    mid = interpolate_pose(a, b, 0.5)
    assert np.allclose(so3_log(mid.rotation), [0.0, 0.0, 0.5], atol=1e-12)
    assert np.allclose(mid.translation, [1.0, 0.0, 0.0])


@pytest.mark.parametrize("alpha", [-0.1, 1.5])
def test_interpolate_pose_rejects_alpha(alpha):
    with pytest.raises(ValueError):
        interpolate_pose(Pose.identity(), Pose.identity(), alpha)


def test_boxplus_boxminus_inverse(make_state, rng):
    x = make_state()
    delta = 0.3 * rng.normal(size=15)
    assert np.allclose(boxminus(boxplus(x, delta), x), delta, atol=1e-10)
    assert boxplus(x, np.zeros(15)).isclose(x, atol=0.0)


def test_state_is_immutable_and_finite(make_state):
    x = make_state(timestamp=3.0)
    with pytest.raises(ValueError):
        x.translation[0] = 1.0
    assert x.is_finite()
    assert not x.replace(velocity=np.array([np.nan, 0.0, 0.0])).is_finite()
    assert NavState.at_rest(1.0).as_vector_dict()["timestamp"] == 1.0
