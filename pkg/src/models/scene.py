"""
Scene, annotation and class catalog data models
"""
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from src.models.geometry import Box3D, PointCloud

LAYOUTS = ("box", "l_shape")


@dataclass(frozen=True)
class ClassSpec:
    """Generative description of one object class"""
    name: str
    dim_mean: Tuple[float, float, float]  # (l, w, h) meters
    dim_std: Tuple[float, float, float]
    points_mean: float
    intensity_range: Tuple[float, float]
    is_ood_class: bool = False
    frequency: float = 1.0  # relative placement weight within ID or OOD group
    layout: str = "box"  # point layout on the box faces: "box" or "l_shape"

    def __post_init__(self):
        object.__setattr__(self, "dim_mean", tuple(float(v) for v in self.dim_mean))
        object.__setattr__(self, "dim_std", tuple(float(v) for v in self.dim_std))
        object.__setattr__(self, "intensity_range", tuple(float(v) for v in self.intensity_range))
        if len(self.dim_mean) != 3 or any(v <= 0 for v in self.dim_mean):
            raise ValueError(f"{self.name}: dim_mean must be 3 positive values, got {self.dim_mean}")
        if len(self.dim_std) != 3 or any(v < 0 for v in self.dim_std):
            raise ValueError(f"{self.name}: dim_std must be 3 non-negative values, got {self.dim_std}")
        if self.points_mean < 1:
            raise ValueError(f"{self.name}: points_mean must be >= 1, got {self.points_mean}")
        lo, hi = self.intensity_range
        if not (0.0 <= lo <= hi <= 1.0):
            raise ValueError(f"{self.name}: intensity_range must satisfy 0 <= lo <= hi <= 1, got {self.intensity_range}")
        if self.frequency <= 0:
            raise ValueError(f"{self.name}: frequency must be positive, got {self.frequency}")
        if self.layout not in LAYOUTS:
            raise ValueError(f"{self.name}: layout must be one of {LAYOUTS}, got {self.layout}")


def id_classes(catalog: List[ClassSpec]) -> List[ClassSpec]:
    """ID classes in catalog order; their position is the class_id"""
    return [c for c in catalog if not c.is_ood_class]


def ood_classes(catalog: List[ClassSpec]) -> List[ClassSpec]:
    return [c for c in catalog if c.is_ood_class]


@dataclass
class Annotation:
    """
    Ground-truth object.

    class_id is the ID class index, or K (number of ID classes) for OOD objects.
    original_class and scale_factors are set by outlier synthesis.
    """
    box: Box3D
    class_id: int
    is_ood: bool
    class_name: str = ""
    original_class: Optional[int] = None
    scale_factors: Optional[Tuple[float, float, float]] = None


@dataclass
class Scene:
    """Point cloud plus its annotated boxes"""
    id: str
    cloud: PointCloud
    annotations: List[Annotation] = field(default_factory=list)

    @property
    def num_ood(self) -> int:
        return sum(1 for a in self.annotations if a.is_ood)

    def copy(self) -> 'Scene':
        return Scene(
            id=self.id,
            cloud=self.cloud.copy(),
            annotations=[
                Annotation(
                    box=a.box,
                    class_id=a.class_id,
                    is_ood=a.is_ood,
                    class_name=a.class_name,
                    original_class=a.original_class,
                    scale_factors=a.scale_factors
                )
                for a in self.annotations
            ]
        )


@dataclass
class DatasetSplit:
    """Train / val / test scene lists"""
    train: List[Scene] = field(default_factory=list)
    val: List[Scene] = field(default_factory=list)
    test: List[Scene] = field(default_factory=list)

    def items(self):
        return [("train", self.train), ("val", self.val), ("test", self.test)]
