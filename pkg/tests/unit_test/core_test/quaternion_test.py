from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from imuguard.core.quaternion import (
    Quaternion,
    exp_map,
    matrices_from_quaternions,
    quat_multiply,
    quaternions_from_matrices,
    rotate,
    rotate_many,
)
from imuguard.exceptions import InvalidRotationError, ShapeError

angles = st.floats(min_value=-np.pi, max_value=np.pi, allow_nan=False)
vectors = st.lists(st.floats(min_value=-10.0, max_value=10.0, allow_nan=False), min_size=3, max_size=3)


def test_identity_rotation_leaves_vectors() -> None:
    """Identity quaternion is the neutral rotation."""
    v = np.array([1.0, -2.0, 3.0])
    assert np.allclose(Quaternion.identity().rotate(v), v)
    assert np.allclose(Quaternion.identity().to_matrix(), np.eye(3))


def test_quarter_turn_about_z() -> None:
    """A +90 degree yaw maps x onto y."""
    q = Quaternion.from_axis_angle([0.0, 0.0, 1.0], np.pi / 2)
    assert np.allclose(rotate(q, [1.0, 0.0, 0.0]), [0.0, 1.0, 0.0], atol=1e-12)
    assert q.yaw == pytest.approx(np.pi / 2)


def test_hamilton_product_composes_rotations() -> None:
    """(a * b) rotates like a after b."""
    a = Quaternion.from_euler_zyx(0.3, -0.2, 0.1)
    b = Quaternion.from_euler_zyx(-1.1, 0.4, 0.7)
    v = np.array([0.5, 1.5, -2.0])
    assert np.allclose((a * b).rotate(v), a.rotate(b.rotate(v)))
    assert np.allclose(quat_multiply(a.as_array(), b.as_array()), (a * b).as_array())


def test_conjugate_inverts_unit_rotation() -> None:
    """q * conj(q) is the identity."""
    q = Quaternion.from_euler_zyx(0.8, 0.1, -0.4)
    assert np.allclose((q * q.conjugate()).as_array(), [1.0, 0.0, 0.0, 0.0])
    assert np.allclose(q.inverse().as_array(), q.conjugate().as_array())


def test_from_array_rejects_wrong_shape() -> None:
    """Quaternions need exactly four components."""
    with pytest.raises(ShapeError):
        Quaternion.from_array([1.0, 0.0, 0.0])


def test_rotate_requires_unit_norm() -> None:
    """Rotation by a scaled quaternion is refused."""
    with pytest.raises(InvalidRotationError):
        Quaternion(2.0, 0.0, 0.0, 0.0).rotate([1.0, 0.0, 0.0])


def test_normalized_rejects_zero() -> None:
    """The zero quaternion has no direction."""
    with pytest.raises(InvalidRotationError):
        Quaternion(0.0, 0.0, 0.0, 0.0).normalized()


def test_exp_map_small_and_large_angles() -> None:
    """Exponential map is unit norm for tiny and large rotation vectors."""
    q = exp_map(np.array([[0.0, 0.0, 0.0], [1e-12, 0.0, 0.0], [0.0, 3.0, 0.0]]))
    assert np.allclose(np.linalg.norm(q, axis=1), 1.0)
    assert np.allclose(q[0], [1.0, 0.0, 0.0, 0.0])
    assert q[2] == pytest.approx([np.cos(1.5), 0.0, np.sin(1.5), 0.0])


@settings(max_examples=50, deadline=None)
@given(yaw=angles, pitch=st.floats(min_value=-1.5, max_value=1.5), roll=angles, v=vectors)
def test_matrix_agrees_with_scipy(yaw: float, pitch: float, roll: float, v: list[float]) -> None:
    """Rotation matrices and vector rotation match scipy's ZYX convention."""
    q = Quaternion.from_euler_zyx(yaw, pitch, roll)
    expected = Rotation.from_euler("ZYX", [yaw, pitch, roll]).as_matrix()
    assert np.allclose(q.to_matrix(), expected, atol=1e-12)
    assert np.allclose(q.rotate(v), expected @ np.asarray(v), atol=1e-9)


@settings(max_examples=50, deadline=None)
@given(yaw=angles, pitch=st.floats(min_value=-1.5, max_value=1.5), roll=angles)
def test_euler_round_trip(yaw: float, pitch: float, roll: float) -> None:
    """ZYX angles survive a conversion away from gimbal lock."""
    q = Quaternion.from_euler_zyx(yaw, pitch, roll)
    y, p, r = q.to_euler_zyx()
    assert Quaternion.from_euler_zyx(y, p, r).angle_to(q) == pytest.approx(0.0, abs=1e-6)


def test_matrix_conversion_is_canonical() -> None:
    """Matrix to quaternion picks the w >= 0 hemisphere."""
    q = Quaternion.from_axis_angle([1.0, 1.0, 0.0], 3.0)
    back = quaternions_from_matrices(matrices_from_quaternions(-q.as_array()[None]))[0]
    assert back[0] >= 0.0
    assert Quaternion.from_array(back).angle_to(q) == pytest.approx(0.0, abs=1e-6)


def test_rotate_many_broadcasts_one_quaternion() -> None:
    """A single quaternion rotates every row."""
    q = Quaternion.from_axis_angle([0.0, 0.0, 1.0], np.pi)
    rows = np.array([[1.0, 0.0, 0.0], [0.0, 2.0, 0.0]])
    assert np.allclose(rotate_many(q.as_array(), rows), [[-1.0, 0.0, 0.0], [0.0, -2.0, 0.0]], atol=1e-12)


def test_slerp_end_points_and_midpoint() -> None:
    """Slerp hits both ends and halves the angle."""
    a = Quaternion.identity()
    b = Quaternion.from_axis_angle([0.0, 0.0, 1.0], 1.0)
    assert a.slerp(b, 0.0).angle_to(a) == pytest.approx(0.0, abs=1e-6)
    assert a.slerp(b, 1.0).angle_to(b) == pytest.approx(0.0, abs=1e-6)
    assert a.slerp(b, 0.5).yaw == pytest.approx(0.5)
