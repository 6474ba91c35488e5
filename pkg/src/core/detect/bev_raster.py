"""
BEV rasterization - per-cell point statistics and smoothed map stacks
"""
from typing import Sequence

import cv2
import numpy as np

from src.models.config import FEATURE_MAP_IDS
from src.models.detection import FeatureMap, GridSpec
from src.models.geometry import PointCloud

BASE_CHANNELS = (
    "log_count",
    "mean_z",
    "max_z",
    "mean_intensity",
    "var_z",
    "mean_abs_dx",
    "mean_abs_dy",
)


def cell_indices(cloud: PointCloud, grid: GridSpec):
    """
    Integer cell of every point.

    Returns:
        (ix, iy, inside) where inside masks points within the grid bounds
    """
    xy = cloud.points[:, :2]
    ix = np.floor((xy[:, 0] - grid.x_min) / grid.cell).astype(np.int64)
    iy = np.floor((xy[:, 1] - grid.y_min) / grid.cell).astype(np.int64)
    inside = (ix >= 0) & (ix < grid.W) & (iy >= 0) & (iy < grid.H)
    return ix, iy, inside


def base_statistics(cloud: PointCloud, grid: GridSpec) -> np.ndarray:
    """H x W x 7 array of per-cell statistics; empty cells are zero"""
    H, W = grid.H, grid.W
    out = np.zeros((H, W, len(BASE_CHANNELS)))
    if len(cloud) == 0:
        return out

    ix, iy, inside = cell_indices(cloud, grid)
    if not np.any(inside):
        return out
    pts = cloud.points[inside]
    ix, iy = ix[inside], iy[inside]
    flat = iy * W + ix
    size = H * W

    count = np.bincount(flat, minlength=size).astype(np.float64)
    z = pts[:, 2]
    sum_z = np.bincount(flat, weights=z, minlength=size)
    sum_zz = np.bincount(flat, weights=z * z, minlength=size)
    sum_i = np.bincount(flat, weights=pts[:, 3], minlength=size)

    max_z = np.full(size, -np.inf)
    np.maximum.at(max_z, flat, z)

    center_x = grid.x_min + (ix + 0.5) * grid.cell
    center_y = grid.y_min + (iy + 0.5) * grid.cell
    sum_dx = np.bincount(flat, weights=np.abs(pts[:, 0] - center_x), minlength=size)
    sum_dy = np.bincount(flat, weights=np.abs(pts[:, 1] - center_y), minlength=size)

    occupied = count > 0
    n = count[occupied]
    mean_z = sum_z[occupied] / n

    stats = np.zeros((size, len(BASE_CHANNELS)))
    stats[:, 0] = np.log1p(count)
    stats[occupied, 1] = mean_z
    stats[occupied, 2] = max_z[occupied]
    stats[occupied, 3] = sum_i[occupied] / n
    # population variance; clip round-off below zero
    stats[occupied, 4] = np.maximum(sum_zz[occupied] / n - mean_z * mean_z, 0.0)
    stats[occupied, 5] = sum_dx[occupied] / n
    stats[occupied, 6] = sum_dy[occupied] / n
    return stats.reshape(H, W, len(BASE_CHANNELS))


def smooth(data: np.ndarray) -> np.ndarray:
    """3x3 box filter per channel, zero padding outside the grid"""
    out = np.empty_like(data)
    for c in range(data.shape[2]):
        channel = np.ascontiguousarray(data[:, :, c])
        out[:, :, c] = cv2.blur(channel, (3, 3), borderType=cv2.BORDER_CONSTANT)
    return out


def map_stack(base: np.ndarray, map_id: str) -> np.ndarray:
    """Channel stack of one map id built from the base statistics"""
    if map_id == "raw":
        return base
    spatial = smooth(base)
    if map_id == "spatial":
        return spatial
    backbone = smooth(spatial)
    if map_id == "backbone":
        return backbone
    if map_id == "neck":
        return np.concatenate([spatial, backbone], axis=2)
    raise ValueError(f"unknown feature map '{map_id}', expected one of {FEATURE_MAP_IDS}")


def rasterize_bev(cloud: PointCloud, grid: GridSpec, stack: Sequence[str] = ("neck",)) -> FeatureMap:
    """
    Rasterize a cloud into a BEV feature map.

    Args:
        cloud: scene points; points outside the grid are dropped
        grid: BEV grid
        stack: map ids ("raw", "spatial", "backbone", "neck"); the stacks of
               several ids are concatenated along channels in the given order

    Returns:
        FeatureMap with data indexed [iy, ix, channel]
    """
    if not stack:
        raise ValueError("stack must name at least one feature map")
    for map_id in stack:
        if map_id not in FEATURE_MAP_IDS:
            raise ValueError(f"unknown feature map '{map_id}', expected one of {FEATURE_MAP_IDS}")

    base = base_statistics(cloud, grid)
    parts = [map_stack(base, map_id) for map_id in stack]
    data = parts[0] if len(parts) == 1 else np.concatenate(parts, axis=2)
    return FeatureMap(grid=grid, data=data)


def stack_channels(stack: Sequence[str]) -> int:
    """Channel count C of the map produced for a stack"""
    n = len(BASE_CHANNELS)
    return sum(2 * n if m == "neck" else n for m in stack)
