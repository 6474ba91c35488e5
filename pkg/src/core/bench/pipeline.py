"""
Benchmark building blocks: detection over a split, method scoring, per-seed evaluation
"""
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.core.baselines.logit_scores import baseline_score
from src.core.detect.surrogate_detector import SurrogateDetector
from src.core.evaluate.matching import greedy_match, match_detections
from src.core.evaluate.metrics import evaluate_method
from src.core.features.feature_extractor import InputBatch, make_inference_inputs, stack_inputs
from src.core.head.mlp import score as head_score
from src.core.head.threshold import OodDecision, acceptance_rate, calibrate_threshold, classify
from src.models.config import RunConfig
from src.models.detection import Detection
from src.models.head import OodHeadParams
from src.models.report import EvalReport, ThresholdSummary
from src.models.scene import Annotation, Scene
from src.utils.parallel import ordered_map
from src.utils.seeding import derive_rng

SPLIT_INDEX = {"train": 0, "val": 1, "test": 2}


def build_detector(config: RunConfig) -> SurrogateDetector:
    return SurrogateDetector(
        catalog=config.dataset.catalog,
        grid=config.detector.grid,
        noise=config.detector.noise,
        feature_maps=config.detector.feature_maps
    )


@dataclass
class ScenePredictions:
    """Detections of one scene with everything the scorers need"""
    scene_id: str
    annotations: List[Annotation]
    detections: List[Detection]
    inputs: Optional[InputBatch]  # None when there are no detections


def detection_rng(config: RunConfig, split: str, scene_index: int, eval_seed: int) -> np.random.Generator:
    """
    Noise stream of one scene's detections.

    Re-seeded per evaluation seed unless eval.freeze_detection_noise is set.
    """
    noise_seed = config.detector.noise_seed
    if config.eval.freeze_detection_noise:
        return derive_rng(noise_seed, SPLIT_INDEX[split], scene_index)
    return derive_rng(noise_seed, SPLIT_INDEX[split], scene_index, eval_seed)


def predict_split(
    scenes: Sequence[Scene],
    detector: SurrogateDetector,
    config: RunConfig,
    split: str,
    eval_seed: int,
    jobs: int = 1
) -> List[ScenePredictions]:
    """Detect every scene and build its head inputs"""

    def one(item):
        index, scene = item
        detections = detector.detect(scene, detection_rng(config, split, index, eval_seed))
        inputs = None
        if detections:
            fmap = detector.feature_map(scene.cloud)
            inputs = stack_inputs(make_inference_inputs(detections, fmap))
        return ScenePredictions(scene.id, list(scene.annotations), detections, inputs)

    return ordered_map(one, list(enumerate(scenes)), jobs)


def method_scores(
    method: str,
    prediction: ScenePredictions,
    params: Optional[OodHeadParams] = None,
    max_distance: float = 0.5
) -> np.ndarray:
    """OOD-ness of every detection of one scene under a method"""
    n = len(prediction.detections)
    if n == 0:
        return np.zeros(0)
    if method == "ours":
        if params is None:
            raise ValueError("method 'ours' needs trained head params")
        return head_score(params, prediction.inputs)
    if method == "oracle":
        scores = np.zeros(n)
        for det_idx, ann_idx in greedy_match(prediction.detections, prediction.annotations, max_distance):
            scores[det_idx] = 1.0 if prediction.annotations[ann_idx].is_ood else 0.0
        return scores
    return np.array([baseline_score(method, d) for d in prediction.detections])


def evaluate_predictions(
    predictions: Sequence[ScenePredictions],
    methods: Sequence[str],
    params: Optional[OodHeadParams] = None,
    max_distance: float = 0.5
) -> Tuple[List[EvalReport], Dict[str, List[np.ndarray]]]:
    """
    Match and score every method over a split.

    Returns:
        (one EvalReport per method in order, per-method per-scene scores)
    """
    reports = []
    all_scores = {}
    n_detections = sum(len(p.detections) for p in predictions)
    for method in methods:
        samples = []
        per_scene = []
        for prediction in predictions:
            scores = method_scores(method, prediction, params, max_distance)
            per_scene.append(scores)
            samples.extend(match_detections(
                prediction.detections, prediction.annotations,
                scene_id=prediction.scene_id, ood_ness=scores, max_distance=max_distance
            ))
        all_scores[method] = per_scene
        reports.append(evaluate_method(method, samples, n_unmatched=n_detections - len(samples)))
    return reports, all_scores


def matched_id_scores(
    predictions: Sequence[ScenePredictions],
    params: OodHeadParams,
    max_distance: float = 0.5
) -> np.ndarray:
    """Head scores of detections matched to ID ground truths"""
    values = []
    for prediction in predictions:
        if not prediction.detections:
            continue
        scores = head_score(params, prediction.inputs)
        for det_idx, ann_idx in greedy_match(prediction.detections, prediction.annotations, max_distance):
            if not prediction.annotations[ann_idx].is_ood:
                values.append(scores[det_idx])
    return np.array(values, dtype=np.float64)


def calibrate_on_split(
    predictions: Sequence[ScenePredictions],
    params: OodHeadParams,
    max_distance: float = 0.5
) -> Tuple[float, float, int]:
    """
    Calibrated delta from matched ID detections.

    Returns:
        (delta, share of those ID scores accepted at delta, number of ID scores)
    """
    id_scores = matched_id_scores(predictions, params, max_distance)
    delta = calibrate_threshold(id_scores)
    return delta, acceptance_rate(id_scores, delta), int(id_scores.size)


def _share(flags: List[bool]) -> Optional[float]:
    return float(np.mean(flags)) if flags else None


def threshold_summary(
    predictions: Sequence[ScenePredictions],
    head_scores: Sequence[np.ndarray],
    delta: float,
    max_distance: float = 0.5
) -> ThresholdSummary:
    """Outcome of the decision rule g(x) <= delta on matched and unmatched detections"""
    id_accepted, ood_flagged, unmatched_flagged = [], [], []
    for prediction, scores in zip(predictions, head_scores):
        matched = set()
        for det_idx, ann_idx in greedy_match(prediction.detections, prediction.annotations, max_distance):
            matched.add(det_idx)
            decision = classify(scores[det_idx], delta)
            if prediction.annotations[ann_idx].is_ood:
                ood_flagged.append(decision == OodDecision.OOD)
            else:
                id_accepted.append(decision == OodDecision.ID)
        for det_idx in range(len(prediction.detections)):
            if det_idx not in matched:
                unmatched_flagged.append(classify(scores[det_idx], delta) == OodDecision.OOD)
    return ThresholdSummary(
        delta=float(delta),
        id_acceptance=_share(id_accepted),
        ood_recall=_share(ood_flagged),
        unmatched_flagged=_share(unmatched_flagged)
    )
