"""
Synthetic LiDAR-like scene generation
"""
from typing import List, Optional, Sequence, Tuple
import math

import numpy as np

from src.core.geometry.box_ops import from_box_frame, in_box_mask
from src.models.config import SceneParams
from src.models.geometry import Box3D, PointCloud
from src.models.scene import Annotation, ClassSpec, DatasetSplit, Scene, id_classes, ood_classes
from src.utils.errors import ConfigError
from src.utils.parallel import ordered_map
from src.utils.seeding import derive_rng

SPLIT_NAMES = ("train", "val", "test")


def _face_samples(lo: np.ndarray, hi: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    """
    Uniform samples on the top and four side faces of the local box [lo, hi].

    Returns (n, 3) local coordinates.
    """
    size = hi - lo
    # top, +u, -u, +v, -v
    areas = np.array([
        size[0] * size[1],
        size[1] * size[2],
        size[1] * size[2],
        size[0] * size[2],
        size[0] * size[2],
    ])
    faces = rng.choice(5, size=n, p=areas / areas.sum())
    r = rng.random((n, 3))
    local = lo + r * size

    local[faces == 0, 2] = hi[2]
    local[faces == 1, 0] = hi[0]
    local[faces == 2, 0] = lo[0]
    local[faces == 3, 1] = hi[1]
    local[faces == 4, 1] = lo[1]
    return local


def _face_area(lo: np.ndarray, hi: np.ndarray) -> float:
    l, w, h = hi - lo
    return l * w + 2 * w * h + 2 * l * h


def sample_object_points(box: Box3D, spec: ClassSpec, rng: np.random.Generator) -> PointCloud:
    """
    Draw surface returns for one object.

    n ~ Poisson(points_mean) clamped to >= 1, uniform on the box's top and side
    faces (no bottom), intensities uniform in the class range. "l_shape"
    classes put points on two legs of the box forming an L in plan view.
    """
    n = max(1, int(rng.poisson(spec.points_mean)))
    half = box.dims / 2.0

    if spec.layout == "l_shape":
        legs = [
            (np.array([-half[0], -half[1], -half[2]]), np.array([half[0], 0.0, half[2]])),
            (np.array([-half[0], 0.0, -half[2]]), np.array([0.0, half[1], half[2]])),
        ]
        areas = np.array([_face_area(lo, hi) for lo, hi in legs])
        leg_of_point = rng.choice(2, size=n, p=areas / areas.sum())
        local = np.zeros((n, 3))
        for leg, (lo, hi) in enumerate(legs):
            mask = leg_of_point == leg
            local[mask] = _face_samples(lo, hi, int(mask.sum()), rng)
    else:
        local = _face_samples(-half, half, n, rng)

    lo_i, hi_i = spec.intensity_range
    intensity = rng.uniform(lo_i, hi_i, size=n)
    xyz = from_box_frame(local, box)
    return PointCloud(np.column_stack([xyz, intensity]))


def _draw_class(
    catalog: Sequence[ClassSpec],
    ood_rate: float,
    rng: np.random.Generator
) -> Tuple[ClassSpec, int, bool]:
    """Pick a class: OOD group with probability ood_rate, then by frequency within the group"""
    id_specs = id_classes(list(catalog))
    ood_specs = ood_classes(list(catalog))
    num_id = len(id_specs)

    use_ood = False
    if ood_specs:
        use_ood = (not id_specs) or rng.random() < ood_rate
    group = ood_specs if use_ood else id_specs
    weights = np.array([c.frequency for c in group])
    spec = group[int(rng.choice(len(group), p=weights / weights.sum()))]
    class_id = num_id if use_ood else id_specs.index(spec)
    return spec, class_id, use_ood


def sample_scene(
    catalog: Sequence[ClassSpec],
    params: SceneParams,
    rng: np.random.Generator,
    scene_id: str = "scene",
    ood_rate: float = 0.0
) -> Scene:
    """
    Place objects and ground clutter in one scene.

    Centers are rejection-sampled so that BEV footprints (bounding circles)
    do not overlap and no two centers are closer than params.min_spacing.
    Objects that cannot be placed within max_retries are dropped.
    """
    if not catalog:
        raise ConfigError("catalog is empty", path="dataset.catalog")
    x_min, x_max, y_min, y_max = params.extent
    n_objects = int(rng.integers(params.min_objects, params.max_objects + 1))

    annotations: List[Annotation] = []
    radii: List[float] = []
    pieces: List[np.ndarray] = []

    for _ in range(n_objects):
        spec, class_id, is_ood = _draw_class(catalog, ood_rate, rng)
        mean = np.array(spec.dim_mean)
        dims = np.maximum(rng.normal(mean, np.array(spec.dim_std)), 0.1 * mean)
        yaw = rng.uniform(-math.pi, math.pi)
        radius = math.hypot(dims[0], dims[1]) / 2.0

        # keep the footprint inside the extent when it fits
        mx = radius if x_max - x_min > 2 * radius else 0.0
        my = radius if y_max - y_min > 2 * radius else 0.0

        box = None
        for _attempt in range(params.max_retries):
            cx = rng.uniform(x_min + mx, x_max - mx)
            cy = rng.uniform(y_min + my, y_max - my)
            ok = True
            for other, other_r in zip(annotations, radii):
                dist = math.hypot(cx - other.box.cx, cy - other.box.cy)
                if dist < max(params.min_spacing, radius + other_r):
                    ok = False
                    break
            if ok:
                box = Box3D(cx, cy, dims[2] / 2.0, dims[0], dims[1], dims[2], yaw)
                break
        if box is None:
            continue

        pieces.append(sample_object_points(box, spec, rng).points)
        annotations.append(Annotation(box=box, class_id=class_id, is_ood=is_ood, class_name=spec.name))
        radii.append(radius)

    area = (x_max - x_min) * (y_max - y_min)
    n_clutter = int(rng.poisson(params.clutter_density * area))
    clutter = np.column_stack([
        rng.uniform(x_min, x_max, size=n_clutter),
        rng.uniform(y_min, y_max, size=n_clutter),
        rng.uniform(-0.2, 0.2, size=n_clutter),
        rng.uniform(0.0, 0.3, size=n_clutter),
    ])
    clutter_cloud = PointCloud(clutter)
    outside = np.ones(n_clutter, dtype=bool)
    for ann in annotations:
        outside &= ~in_box_mask(clutter_cloud, ann.box)
    pieces.append(clutter[outside])

    cloud = PointCloud(np.vstack(pieces) if pieces else np.zeros((0, 4)))
    return Scene(id=scene_id, cloud=cloud, annotations=annotations)


def check_catalog(catalog: Sequence[ClassSpec]) -> None:
    if len(id_classes(list(catalog))) < 2:
        raise ConfigError("catalog needs at least 2 ID classes", path="dataset.catalog")
    if not ood_classes(list(catalog)):
        raise ConfigError("catalog needs at least 1 OOD class", path="dataset.catalog")


def build_splits(
    catalog: Sequence[ClassSpec],
    counts: Tuple[int, int, int],
    master_seed: int,
    ood_rate: float = 0.02,
    params: Optional[SceneParams] = None,
    jobs: int = 1
) -> DatasetSplit:
    """
    Generate train / val / test scenes.

    Train scenes never contain OOD classes; val/test draw each object from the
    OOD classes with probability ood_rate. Scene i of split s uses the stream
    derived from (master_seed, s, i).
    """
    check_catalog(catalog)
    params = params or SceneParams()
    id_only = id_classes(list(catalog))

    def generate(split_index: int, count: int) -> List[Scene]:
        placement = id_only if split_index == 0 else list(catalog)
        rate = 0.0 if split_index == 0 else ood_rate

        def one(i: int) -> Scene:
            rng = derive_rng(master_seed, split_index, i)
            return sample_scene(placement, params, rng, f"{SPLIT_NAMES[split_index]}-{i:05d}", rate)

        return ordered_map(one, range(count), jobs)

    train_n, val_n, test_n = counts
    return DatasetSplit(
        train=generate(0, train_n),
        val=generate(1, val_n),
        test=generate(2, test_n)
    )
