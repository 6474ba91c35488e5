"""
Geometric data models: point clouds and oriented 3D boxes
"""
from dataclasses import dataclass
import math

import numpy as np


def normalize_yaw(yaw: float) -> float:
    """Map an angle onto [-pi, pi); angles already in range come back unchanged"""
    if -math.pi <= yaw < math.pi:
        return yaw
    wrapped = math.fmod(yaw + math.pi, 2.0 * math.pi)
    if wrapped < 0:
        wrapped += 2.0 * math.pi
    result = wrapped - math.pi
    # fmod can land exactly on +pi after the shift back
    if result >= math.pi:
        result -= 2.0 * math.pi
    return result


@dataclass
class PointCloud:
    """N x 4 array of (x, y, z, intensity) rows"""
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.size == 0:
            pts = pts.reshape(0, 4)
        if pts.ndim != 2 or pts.shape[1] != 4:
            raise ValueError(f"points must have shape (N, 4), got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("point coordinates must be finite")
        if pts.shape[0] and (pts[:, 3].min() < 0.0 or pts[:, 3].max() > 1.0):
            raise ValueError("intensity must lie in [0, 1]")
        self.points = pts

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def xyz(self) -> np.ndarray:
        return self.points[:, :3]

    @property
    def intensity(self) -> np.ndarray:
        return self.points[:, 3]

    @classmethod
    def empty(cls) -> 'PointCloud':
        return cls(np.zeros((0, 4)))

    def copy(self) -> 'PointCloud':
        return PointCloud(self.points.copy())


@dataclass(frozen=True)
class Box3D:
    """7-DoF box: center, dims (l along local x, w along local y, h along z), yaw"""
    cx: float
    cy: float
    cz: float
    l: float
    w: float
    h: float
    yaw: float = 0.0

    def __post_init__(self):
        values = (self.cx, self.cy, self.cz, self.l, self.w, self.h, self.yaw)
        if not all(math.isfinite(v) for v in values):
            raise ValueError(f"box fields must be finite, got {values}")
        if self.l <= 0 or self.w <= 0 or self.h <= 0:
            raise ValueError(f"box dims must be positive, got ({self.l}, {self.w}, {self.h})")
        # frozen dataclass: write through object.__setattr__
        for name in ("cx", "cy", "cz", "l", "w", "h"):
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "yaw", normalize_yaw(float(self.yaw)))

    @property
    def center(self) -> np.ndarray:
        return np.array([self.cx, self.cy, self.cz])

    @property
    def dims(self) -> np.ndarray:
        return np.array([self.l, self.w, self.h])

    @property
    def volume(self) -> float:
        return self.l * self.w * self.h

    def to_array(self) -> np.ndarray:
        """[cx, cy, cz, l, w, h, yaw]"""
        return np.array([self.cx, self.cy, self.cz, self.l, self.w, self.h, self.yaw])

    @classmethod
    def from_array(cls, values) -> 'Box3D':
        if len(values) != 7:
            raise ValueError(f"box vector must have 7 values, got {len(values)}")
        return cls(*(float(v) for v in values))
