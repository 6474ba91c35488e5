"""
Data models for the surrogate detector and the OOD head inputs
"""
from dataclasses import dataclass
from typing import Optional
import math

import numpy as np

from src.models.geometry import Box3D


@dataclass(frozen=True)
class GridSpec:
    """BEV grid: world bounds in meters and square cell size"""
    x_min: float = -32.0
    x_max: float = 32.0
    y_min: float = -32.0
    y_max: float = 32.0
    cell: float = 0.5

    def __post_init__(self):
        if self.x_max <= self.x_min or self.y_max <= self.y_min:
            raise ValueError(f"grid bounds are empty: x [{self.x_min}, {self.x_max}], y [{self.y_min}, {self.y_max}]")
        if self.cell <= 0:
            raise ValueError(f"cell must be positive, got {self.cell}")

    @property
    def H(self) -> int:
        return int(math.ceil((self.y_max - self.y_min) / self.cell))

    @property
    def W(self) -> int:
        return int(math.ceil((self.x_max - self.x_min) / self.cell))

    def shifted(self, dx: float, dy: float) -> 'GridSpec':
        return GridSpec(self.x_min + dx, self.x_max + dx, self.y_min + dy, self.y_max + dy, self.cell)


@dataclass
class FeatureMap:
    """H x W x C BEV feature grid"""
    grid: GridSpec
    data: np.ndarray

    def __post_init__(self):
        if self.data.ndim != 3:
            raise ValueError(f"feature map data must be H x W x C, got shape {self.data.shape}")
        if self.data.shape[:2] != (self.grid.H, self.grid.W):
            raise ValueError(f"data shape {self.data.shape[:2]} does not match grid ({self.grid.H}, {self.grid.W})")
        if self.data.shape[2] < 1:
            raise ValueError("feature map needs at least one channel")

    @property
    def channels(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True)
class DetectionNoiseConfig:
    """Corruption applied by the surrogate detector"""
    center_sigma: float = 0.1  # meters, per BEV axis
    dim_jitter: float = 0.05  # multiplicative std
    fp_rate: float = 0.5  # expected false positives per scene
    miss_rate: float = 0.05

    def __post_init__(self):
        if self.center_sigma < 0 or self.dim_jitter < 0 or self.fp_rate < 0:
            raise ValueError("noise magnitudes must be non-negative")
        if not 0.0 <= self.miss_rate <= 1.0:
            raise ValueError(f"miss_rate must be in [0, 1], got {self.miss_rate}")


@dataclass
class Detection:
    """Single object prediction from the surrogate detector"""
    box: Box3D
    logits: np.ndarray
    predicted_class: int
    score: float

    def __post_init__(self):
        self.logits = np.asarray(self.logits, dtype=np.float64)
        if self.logits.ndim != 1 or self.logits.size < 1:
            raise ValueError(f"logits must be a non-empty vector, got shape {self.logits.shape}")
        if self.predicted_class != int(np.argmax(self.logits)):
            raise ValueError(
                f"predicted_class {self.predicted_class} is not argmax of logits ({int(np.argmax(self.logits))})"
            )
        if not math.isfinite(self.score) or self.score < 0 or self.score > 1:
            raise ValueError(f"score must be in [0,1], got {self.score}")


@dataclass
class RawInput:
    """Pre-encoder inputs of the OOD head for one object"""
    f_feat: np.ndarray  # (C,)
    box_vec: np.ndarray  # (7,)
    logits: np.ndarray  # (K,)
    onehot: np.ndarray  # (K,)
    label: Optional[int] = None  # 1 = OOD, 0 = ID; training tuples only

    def __post_init__(self):
        if self.box_vec.shape != (7,):
            raise ValueError(f"box_vec must have 7 values, got {self.box_vec.shape}")
        if self.logits.shape != self.onehot.shape:
            raise ValueError(f"logits {self.logits.shape} and onehot {self.onehot.shape} differ in length")
        if np.count_nonzero(self.onehot) != 1 or self.onehot.max() != 1.0:
            raise ValueError("onehot must contain exactly one 1")
        if self.label is not None and self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label}")
