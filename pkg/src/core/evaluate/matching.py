"""
Greedy prediction-to-ground-truth matching by BEV center distance
"""
from typing import List, Optional, Sequence, Tuple

from src.core.geometry.box_ops import bev_center_distance
from src.models.detection import Detection
from src.models.report import MatchedSample
from src.models.scene import Annotation

MATCH_DISTANCE = 0.5


def greedy_match(
    detections: Sequence[Detection],
    annotations: Sequence[Annotation],
    max_distance: float = MATCH_DISTANCE
) -> List[Tuple[int, int]]:
    """
    Match detections to annotations.

    Detections are visited by score, highest first (ties by index); each one
    takes the nearest unmatched annotation strictly closer than max_distance.

    Returns:
        (detection index, annotation index) pairs in visiting order
    """
    order = sorted(range(len(detections)), key=lambda i: (-detections[i].score, i))
    taken = set()
    pairs = []
    for det_idx in order:
        best_dist = max_distance
        best_ann = None
        for ann_idx, ann in enumerate(annotations):
            if ann_idx in taken:
                continue
            dist = bev_center_distance(detections[det_idx].box, ann.box)
            if dist < best_dist:
                best_dist = dist
                best_ann = ann_idx
        if best_ann is not None:
            taken.add(best_ann)
            pairs.append((det_idx, best_ann))
    return pairs


def match_detections(
    detections: Sequence[Detection],
    annotations: Sequence[Annotation],
    scene_id: str = "",
    ood_ness: Optional[Sequence[float]] = None,
    max_distance: float = MATCH_DISTANCE
) -> List[MatchedSample]:
    """
    Matched samples of one scene.

    Args:
        detections: predictions of the scene
        annotations: ground truths of the scene
        scene_id: carried into every sample
        ood_ness: optional per-detection method scores; 0.0 when omitted
        max_distance: strict BEV matching radius in meters

    Returns:
        One sample per matched detection; unmatched detections are left out
        (their count is len(detections) - len(samples))
    """
    if ood_ness is not None and len(ood_ness) != len(detections):
        raise ValueError(f"{len(ood_ness)} scores for {len(detections)} detections")
    samples = []
    for det_idx, ann_idx in greedy_match(detections, annotations, max_distance):
        samples.append(MatchedSample(
            ood_ness=float(ood_ness[det_idx]) if ood_ness is not None else 0.0,
            truth_is_ood=bool(annotations[ann_idx].is_ood),
            scene_id=scene_id,
            detection_index=det_idx,
            annotation_index=ann_idx
        ))
    return samples
