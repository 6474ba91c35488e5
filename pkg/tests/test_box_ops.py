import math

import numpy as np
import pytest

from src.core.geometry.box_ops import (
    bev_center_distance, flip_across_x_axis, from_box_frame, points_in_box, rotate_about_origin,
    scale_box_and_points, to_box_frame
)
from src.models.geometry import Box3D, PointCloud, normalize_yaw


def random_box(rng):
    return Box3D(
        *rng.uniform(-20, 20, size=3),
        *rng.uniform(0.3, 6.0, size=3),
        rng.uniform(-math.pi, math.pi)
    )


def cloud_of(xyz):
    xyz = np.atleast_2d(np.asarray(xyz, dtype=np.float64))
    return PointCloud(np.column_stack([xyz, np.full(len(xyz), 0.5)]))


class TestYaw:
    def test_in_range_unchanged(self):
        assert normalize_yaw(1.0) == 1.0
        assert normalize_yaw(-math.pi) == -math.pi

    def test_pi_wraps_to_minus_pi(self):
        assert normalize_yaw(math.pi) == pytest.approx(-math.pi)

    def test_wraps_into_range(self):
        for yaw in (7.0, -7.0, 100.0, -3 * math.pi):
            wrapped = normalize_yaw(yaw)
            assert -math.pi <= wrapped < math.pi
            assert math.cos(wrapped) == pytest.approx(math.cos(yaw))
            assert math.sin(wrapped) == pytest.approx(math.sin(yaw))

    def test_box_rejects_non_positive_dims(self):
        with pytest.raises(ValueError):
            Box3D(0, 0, 0, 0.0, 1, 1)


class TestBoxFrame:
    def test_center_maps_to_origin(self, rng):
        box = random_box(rng)
        assert np.allclose(to_box_frame(box.center, box), 0.0, atol=1e-12)

    def test_quarter_turn(self):
        box = Box3D(0, 0, 0, 2, 1, 1, math.pi / 2)
        assert np.allclose(to_box_frame([0.0, 1.0, 0.0], box), [[1.0, 0.0, 0.0]], atol=1e-12)

    def test_matches_rotation_matrix(self, rng):
        for _ in range(50):
            box = random_box(rng)
            p = rng.uniform(-30, 30, size=3)
            c, s = math.cos(box.yaw), math.sin(box.yaw)
            rot = np.array([[c, s], [-s, c]])
            expected_uv = rot @ (p[:2] - box.center[:2])
            got = to_box_frame(p, box)[0]
            assert np.allclose(got[:2], expected_uv, atol=1e-12)
            assert got[2] == pytest.approx(p[2] - box.cz, abs=1e-12)

    def test_round_trip(self, rng):
        box = random_box(rng)
        pts = rng.uniform(-30, 30, size=(10_000, 3))
        back = from_box_frame(to_box_frame(pts, box), box)
        assert np.max(np.abs(back - pts)) < 1e-12


class TestPointsInBox:
    def test_center_included(self):
        box = Box3D(1, 2, 3, 2, 2, 2, 0.3)
        assert points_in_box(cloud_of(box.center), box).tolist() == [0]

    def test_beyond_half_length_excluded(self):
        box = Box3D(1, 2, 3, 2, 1, 1, 0.0)
        assert points_in_box(cloud_of([1 + 2, 2, 3]), box).size == 0

    def test_boundary_included(self):
        box = Box3D(0, 0, 0, 2, 2, 2, 0.0)
        corners = [[1, 1, 1], [-1, -1, -1], [1, 0, 0], [0, -1, 1]]
        assert points_in_box(cloud_of(corners), box).tolist() == [0, 1, 2, 3]

    def test_matches_per_point_oracle(self, rng):
        box = random_box(rng)
        pts = box.center + rng.uniform(-4, 4, size=(100, 3))
        expected = []
        c, s = math.cos(box.yaw), math.sin(box.yaw)
        for i, p in enumerate(pts):
            dx, dy = p[0] - box.cx, p[1] - box.cy
            u, v, t = c * dx + s * dy, -s * dx + c * dy, p[2] - box.cz
            if abs(u) <= box.l / 2 and abs(v) <= box.w / 2 and abs(t) <= box.h / 2:
                expected.append(i)
        assert points_in_box(cloud_of(pts), box).tolist() == expected

    def test_yaw_equivariant(self, rng):
        box = Box3D(0, 0, 0, 3, 1.5, 2, 0.4)
        pts = rng.uniform(-3, 3, size=(300, 3))
        before = points_in_box(cloud_of(pts), box)
        cloud, (rotated,) = rotate_about_origin(cloud_of(pts), [box], 1.1)
        assert points_in_box(cloud, rotated).tolist() == before.tolist()

    def test_empty_cloud(self):
        assert points_in_box(PointCloud.empty(), Box3D(0, 0, 0, 1, 1, 1)).size == 0


class TestBevDistance:
    def test_examples(self):
        a = Box3D(0, 0, 0, 1, 1, 1)
        assert bev_center_distance(a, a) == 0.0
        assert bev_center_distance(a, Box3D(3, 4, 9, 1, 1, 1)) == pytest.approx(5.0)
        assert bev_center_distance(a, Box3D(0, 0, 5, 1, 1, 1)) == 0.0

    def test_metric_properties(self, rng):
        for _ in range(100):
            a, b, c = random_box(rng), random_box(rng), random_box(rng)
            ab = bev_center_distance(a, b)
            assert ab >= 0
            assert ab == bev_center_distance(b, a)
            assert bev_center_distance(a, c) <= ab + bev_center_distance(b, c) + 1e-12


class TestScaling:
    def test_identity(self, rng):
        box = Box3D(0, 0, 1, 2, 2, 2, 0.7)
        cloud = cloud_of(rng.uniform(-2, 2, size=(50, 3)))
        new_cloud, new_box = scale_box_and_points(cloud, box, (1, 1, 1))
        assert np.allclose(new_cloud.points, cloud.points, atol=1e-12)
        assert new_box == box

    def test_dims_and_volume(self):
        box = Box3D(0, 0, 0, 4, 2, 1.5, 0.2)
        _, new_box = scale_box_and_points(PointCloud.empty(), box, (2, 0.5, 1))
        assert new_box.dims.tolist() == [8.0, 1.0, 1.5]
        assert new_box.volume / box.volume == pytest.approx(1.0)
        assert (new_box.cx, new_box.cy, new_box.cz, new_box.yaw) == (box.cx, box.cy, box.cz, box.yaw)

    def test_inside_points_stay_inside(self, rng):
        box = Box3D(1, -2, 0.5, 3, 2, 1, -0.8)
        pts = from_box_frame(rng.uniform(-0.5, 0.5, size=(80, 3)) * box.dims, box)
        outside = box.center + np.array([[10.0, 0, 0], [0, -10.0, 0]])
        cloud = cloud_of(np.vstack([pts, outside]))
        new_cloud, new_box = scale_box_and_points(cloud, box, (0.3, 2.5, 1.7))
        assert points_in_box(new_cloud, new_box).tolist() == list(range(80))
        assert np.array_equal(new_cloud.points[80:], cloud.points[80:])
        assert np.array_equal(new_cloud.intensity, cloud.intensity)

    def test_unit_axis_keeps_local_coordinate(self, rng):
        box = Box3D(0, 0, 0, 2, 2, 2, 0.5)
        pts = from_box_frame(rng.uniform(-0.9, 0.9, size=(20, 3)), box)
        new_cloud, _ = scale_box_and_points(cloud_of(pts), box, (1.0, 2.0, 0.5))
        before = to_box_frame(pts, box)
        after = to_box_frame(new_cloud.points, box)
        assert np.allclose(after[:, 0], before[:, 0], atol=1e-12)

    @pytest.mark.parametrize("factors", [(0, 1, 1), (1, -2, 1), (1, 1, float("nan"))])
    def test_rejects_bad_factors(self, factors):
        with pytest.raises(ValueError):
            scale_box_and_points(PointCloud.empty(), Box3D(0, 0, 0, 1, 1, 1), factors)


def test_flip_mirrors_y_and_yaw():
    cloud, (box,) = flip_across_x_axis(cloud_of([1.0, 2.0, 0.0]), [Box3D(1, 2, 0, 3, 1, 1, 0.5)])
    assert cloud.points[0, 1] == -2.0
    assert (box.cy, box.yaw) == (-2.0, -0.5)
