"""
Box-frame transforms, point-in-box membership and box scaling
"""
from typing import Optional, Sequence, Tuple
import math

import numpy as np

from src.models.geometry import Box3D, PointCloud

# Slack for closed-box membership; covers round-off of points built on the faces
MEMBERSHIP_EPS = 1e-9


def _as_xyz(points) -> np.ndarray:
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    return arr[:, :3]


def to_box_frame(points, box: Box3D) -> np.ndarray:
    """
    Express world points in the box frame.

    Args:
        points: (N, >=3) array or a single point
        box: reference box

    Returns:
        (N, 3) array of (u, v, t); u along box length, v along width, t up
    """
    xyz = _as_xyz(points)
    c, s = math.cos(box.yaw), math.sin(box.yaw)
    dx = xyz[:, 0] - box.cx
    dy = xyz[:, 1] - box.cy
    u = c * dx + s * dy
    v = -s * dx + c * dy
    t = xyz[:, 2] - box.cz
    return np.stack([u, v, t], axis=1)


def from_box_frame(local: np.ndarray, box: Box3D) -> np.ndarray:
    """Inverse of to_box_frame; returns (N, 3) world xyz"""
    uvt = _as_xyz(local)
    c, s = math.cos(box.yaw), math.sin(box.yaw)
    x = box.cx + c * uvt[:, 0] - s * uvt[:, 1]
    y = box.cy + s * uvt[:, 0] + c * uvt[:, 1]
    z = box.cz + uvt[:, 2]
    return np.stack([x, y, z], axis=1)


def in_box_mask(cloud: PointCloud, box: Box3D) -> np.ndarray:
    """Boolean mask of points inside the closed box"""
    if len(cloud) == 0:
        return np.zeros(0, dtype=bool)
    uvt = to_box_frame(cloud.points, box)
    half = box.dims / 2.0 + MEMBERSHIP_EPS
    return np.all(np.abs(uvt) <= half, axis=1)


def points_in_box(cloud: PointCloud, box: Box3D) -> np.ndarray:
    """Ascending indices of cloud points inside the box (boundary included)"""
    return np.flatnonzero(in_box_mask(cloud, box))


def bev_center_distance(a: Box3D, b: Box3D) -> float:
    """Euclidean distance between box centers on the ground plane"""
    return math.hypot(a.cx - b.cx, a.cy - b.cy)


def scale_box_and_points(
    cloud: PointCloud,
    box: Box3D,
    factors: Sequence[float],
    indices: Optional[np.ndarray] = None
) -> Tuple[PointCloud, Box3D]:
    """
    Stretch a box and the points it contains along its own axes.

    Args:
        cloud: scene cloud
        box: box to scale
        factors: (sx, sy, sz) applied to (l, w, h) and to the (u, v, t)
                 coordinates of every in-box point
        indices: points to move; defaults to points_in_box(cloud, box)

    Returns:
        (new cloud, new box); all other points and intensities are kept
    """
    factors = np.asarray(factors, dtype=np.float64)
    if factors.shape != (3,):
        raise ValueError(f"expected 3 scale factors, got {factors.shape}")
    if np.any(factors <= 0) or not np.all(np.isfinite(factors)):
        raise ValueError(f"scale factors must be positive, got {factors.tolist()}")

    new_box = Box3D(
        box.cx, box.cy, box.cz,
        box.l * factors[0], box.w * factors[1], box.h * factors[2],
        box.yaw
    )

    points = cloud.points.copy()
    idx = points_in_box(cloud, box) if indices is None else np.asarray(indices, dtype=np.int64)
    if idx.size:
        local = to_box_frame(points[idx], box) * factors
        points[idx, :3] = from_box_frame(local, box)
    return PointCloud(points), new_box


def rotate_about_origin(cloud: PointCloud, boxes: Sequence[Box3D], angle: float) -> Tuple[PointCloud, list]:
    """Rotate cloud and boxes together about the world z-axis"""
    c, s = math.cos(angle), math.sin(angle)
    points = cloud.points.copy()
    x, y = points[:, 0].copy(), points[:, 1].copy()
    points[:, 0] = c * x - s * y
    points[:, 1] = s * x + c * y
    rotated = [
        Box3D(c * b.cx - s * b.cy, s * b.cx + c * b.cy, b.cz, b.l, b.w, b.h, b.yaw + angle)
        for b in boxes
    ]
    return PointCloud(points), rotated


def flip_across_x_axis(cloud: PointCloud, boxes: Sequence[Box3D]) -> Tuple[PointCloud, list]:
    """Mirror cloud and boxes across the x-axis (y -> -y, yaw -> -yaw)"""
    points = cloud.points.copy()
    points[:, 1] = -points[:, 1]
    flipped = [Box3D(b.cx, -b.cy, b.cz, b.l, b.w, b.h, -b.yaw) for b in boxes]
    return PointCloud(points), flipped
