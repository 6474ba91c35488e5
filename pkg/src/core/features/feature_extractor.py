"""
OOD head input assembly: map features at box centers, box vectors, logits and classes
"""
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from src.core.detect.surrogate_detector import object_logits
from src.models.detection import Detection, FeatureMap, RawInput
from src.models.scene import ClassSpec, Scene, id_classes


def grid_coordinates(fmap: FeatureMap, x, y) -> Tuple[np.ndarray, np.ndarray]:
    """Continuous (gx, gy) with cell centers on integers, clamped to the grid"""
    grid = fmap.grid
    gx = (np.asarray(x, dtype=np.float64) - grid.x_min) / grid.cell - 0.5
    gy = (np.asarray(y, dtype=np.float64) - grid.y_min) / grid.cell - 0.5
    gx = np.clip(gx, 0.0, grid.W - 1)
    gy = np.clip(gy, 0.0, grid.H - 1)
    return gx, gy


def bilinear_sample_many(fmap: FeatureMap, xy: np.ndarray) -> np.ndarray:
    """
    Bilinear samples at many world positions.

    Args:
        fmap: feature map
        xy: (N, 2) world coordinates in meters

    Returns:
        (N, C) sampled features
    """
    xy = np.asarray(xy, dtype=np.float64).reshape(-1, 2)
    H, W = fmap.data.shape[:2]
    gx, gy = grid_coordinates(fmap, xy[:, 0], xy[:, 1])

    x_low = gx.astype(np.int64)
    y_low = gy.astype(np.int64)
    x_high = np.where(x_low < W - 1, x_low + 1, x_low)
    y_high = np.where(y_low < H - 1, y_low + 1, y_low)

    wxh = (gx - x_low)[:, None]
    wyh = (gy - y_low)[:, None]
    wxl = 1.0 - wxh
    wyl = 1.0 - wyh

    data = fmap.data
    value1 = data[y_low, x_low] * wyl * wxl
    value2 = data[y_low, x_high] * wyl * wxh
    value3 = data[y_high, x_low] * wyh * wxl
    value4 = data[y_high, x_high] * wyh * wxh
    return value1 + value2 + value3 + value4


def bilinear_sample(fmap: FeatureMap, world_xy: Sequence[float]) -> np.ndarray:
    """Length-C feature vector at one world (x, y); queries outside the grid clamp to its edge"""
    return bilinear_sample_many(fmap, np.asarray(world_xy, dtype=np.float64)[None, :])[0]


def one_hot(index: int, size: int) -> np.ndarray:
    vec = np.zeros(size)
    vec[index] = 1.0
    return vec


def make_training_inputs(scene: Scene, fmap: FeatureMap, catalog: Sequence[ClassSpec]) -> List[RawInput]:
    """
    One labeled input per annotation, built from the ground-truth boxes.

    OOD annotations must carry original_class (set by outlier synthesis);
    it supplies their one-hot class.
    """
    if not scene.annotations:
        return []
    num_classes = len(id_classes(list(catalog)))
    centers = np.array([[a.box.cx, a.box.cy] for a in scene.annotations])
    features = bilinear_sample_many(fmap, centers)

    inputs = []
    for ann, f_feat in zip(scene.annotations, features):
        cls = ann.original_class if ann.is_ood else ann.class_id
        if cls is None:
            raise ValueError(f"scene {scene.id}: OOD annotation without original_class")
        inputs.append(RawInput(
            f_feat=f_feat,
            box_vec=ann.box.to_array(),
            logits=object_logits(scene.cloud, ann.box, catalog),
            onehot=one_hot(cls, num_classes),
            label=int(ann.is_ood)
        ))
    return inputs


def make_inference_inputs(detections: List[Detection], fmap: FeatureMap) -> List[RawInput]:
    """One unlabeled input per detection, sampled at the predicted box center"""
    if not detections:
        return []
    centers = np.array([[d.box.cx, d.box.cy] for d in detections])
    features = bilinear_sample_many(fmap, centers)
    return [
        RawInput(
            f_feat=f_feat,
            box_vec=d.box.to_array(),
            logits=d.logits.copy(),
            onehot=one_hot(d.predicted_class, d.logits.size)
        )
        for d, f_feat in zip(detections, features)
    ]


@dataclass
class InputBatch:
    """Row-stacked RawInputs"""
    f_feat: np.ndarray  # (N, C)
    box_vec: np.ndarray  # (N, 7)
    logits: np.ndarray  # (N, K)
    onehot: np.ndarray  # (N, K)
    labels: np.ndarray  # (N,), -1 where unlabeled

    def __len__(self) -> int:
        return self.f_feat.shape[0]

    def take(self, index: np.ndarray) -> 'InputBatch':
        return InputBatch(
            f_feat=self.f_feat[index],
            box_vec=self.box_vec[index],
            logits=self.logits[index],
            onehot=self.onehot[index],
            labels=self.labels[index]
        )


def stack_inputs(inputs: List[RawInput]) -> InputBatch:
    if not inputs:
        raise ValueError("cannot stack an empty input list")
    return InputBatch(
        f_feat=np.stack([i.f_feat for i in inputs]),
        box_vec=np.stack([i.box_vec for i in inputs]),
        logits=np.stack([i.logits for i in inputs]),
        onehot=np.stack([i.onehot for i in inputs]),
        labels=np.array([-1 if i.label is None else i.label for i in inputs], dtype=np.int64)
    )
