"""
Training-time outliers: per-axis random scaling of annotated ID objects
"""
from typing import List, Tuple
import math

import numpy as np

from src.core.geometry.box_ops import flip_across_x_axis, points_in_box, rotate_about_origin, scale_box_and_points
from src.models.config import GlobalAugmentConfig, ScalingConfig
from src.models.scene import Annotation, Scene


def eligible_objects(scene: Scene, min_points: int = 5) -> List[int]:
    """Indices of non-OOD annotations whose box holds at least min_points points"""
    return [
        i for i, ann in enumerate(scene.annotations)
        if not ann.is_ood and points_in_box(scene.cloud, ann.box).size >= min_points
    ]


def _draw_factor(config: ScalingConfig, small: bool, rng: np.random.Generator) -> float:
    lo, hi = config.small_range if small else config.large_range
    return float(rng.uniform(lo, hi))


def sample_scale_factors(config: ScalingConfig, rng: np.random.Generator) -> Tuple[float, float, float]:
    """
    Draw (sx, sy, sz).

    Independent axes: three branch draws (small with probability p_small),
    then one uniform value per axis inside its branch range. Equal axes: one
    branch and one value shared by all three axes.
    """
    if not config.independent_axes:
        small = bool(rng.random() < config.p_small)
        f = _draw_factor(config, small, rng)
        return (f, f, f)

    branches = rng.random(3) < config.p_small
    return tuple(_draw_factor(config, bool(small), rng) for small in branches)


def selection_count(n_eligible: int, fraction: float) -> int:
    """round(fraction * n) with halves rounded up"""
    return int(math.floor(fraction * n_eligible + 0.5))


def synthesize_outliers(
    scene: Scene,
    config: ScalingConfig,
    rng: np.random.Generator,
    ood_label: int
) -> Scene:
    """
    Scale a random subset of eligible objects and relabel them as OOD.

    Args:
        scene: ID-only training scene (left untouched)
        config: scaling ranges, branch probability and selection fraction
        rng: per-(seed, epoch, scene) stream
        ood_label: class id reserved for OOD objects (number of ID classes)

    Returns:
        Fresh scene; selected objects carry class_id=ood_label, is_ood=True,
        their source class in original_class and the factors used in
        scale_factors. Every ID object keeps original_class = class_id.
    """
    out = scene.copy()
    for ann in out.annotations:
        if not ann.is_ood and ann.original_class is None:
            ann.original_class = ann.class_id

    candidates = eligible_objects(out, config.min_points)
    n_select = selection_count(len(candidates), config.select_fraction)
    if n_select == 0:
        return out

    chosen = rng.choice(len(candidates), size=n_select, replace=False)
    selected = sorted(candidates[int(c)] for c in chosen)

    # membership on the input cloud; a point in two boxes goes to the first
    claimed = np.zeros(len(out.cloud), dtype=bool)
    members = {}
    for index in selected:
        idx = points_in_box(out.cloud, out.annotations[index].box)
        members[index] = idx[~claimed[idx]]
        claimed[idx] = True

    cloud = out.cloud
    for index in selected:
        ann = out.annotations[index]
        factors = sample_scale_factors(config, rng)
        cloud, new_box = scale_box_and_points(cloud, ann.box, factors, members[index])
        out.annotations[index] = Annotation(
            box=new_box,
            class_id=ood_label,
            is_ood=True,
            class_name=ann.class_name,
            original_class=ann.class_id,
            scale_factors=factors
        )
    out.cloud = cloud
    return out


def augment_scene_globally(scene: Scene, config: GlobalAugmentConfig, rng: np.random.Generator) -> Scene:
    """Random flip across the x-axis and random yaw about the origin, applied to cloud and boxes"""
    if not config.flip and config.max_rotation <= 0:
        return scene

    cloud = scene.cloud
    boxes = [a.box for a in scene.annotations]
    if config.flip and rng.random() < 0.5:
        cloud, boxes = flip_across_x_axis(cloud, boxes)
    if config.max_rotation > 0:
        angle = float(rng.uniform(-config.max_rotation, config.max_rotation))
        cloud, boxes = rotate_about_origin(cloud, boxes, angle)

    out = scene.copy()
    out.cloud = cloud
    for ann, box in zip(out.annotations, boxes):
        ann.box = box
    return out
