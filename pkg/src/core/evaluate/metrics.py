"""
Threshold-free OOD metrics over matched predictions (ID is the positive class for FPR-95)
"""
from typing import Sequence, Tuple

import numpy as np
from sklearn.metrics import average_precision_score, roc_auc_score, roc_curve

from src.models.report import EvalReport, MatchedSample
from src.utils.errors import UndefinedMetricError

ID = "id"
OOD = "ood"


def _arrays(samples: Sequence[MatchedSample]) -> Tuple[np.ndarray, np.ndarray]:
    """(ood_ness, is_ood) arrays"""
    scores = np.array([s.ood_ness for s in samples], dtype=np.float64)
    is_ood = np.array([s.truth_is_ood for s in samples], dtype=bool)
    return scores, is_ood


def _percent(fraction: float) -> float:
    # summation round-off can step just past 1
    return float(min(max(fraction * 100.0, 0.0), 100.0))


def _require_both(is_ood: np.ndarray, metric: str) -> None:
    n_ood = int(is_ood.sum())
    n_id = is_ood.size - n_ood
    if n_id == 0 or n_ood == 0:
        raise UndefinedMetricError(f"{metric} needs ID and OOD samples, got {n_id} ID / {n_ood} OOD")


def fpr_at_95_tpr(samples: Sequence[MatchedSample]) -> float:
    """
    FPR (percent) at the largest ID-ness threshold accepting >= 95% of ID.

    Only attainable operating points are used; no interpolation.
    """
    scores, is_ood = _arrays(samples)
    _require_both(is_ood, "FPR-95")
    is_id = ~is_ood
    n_pos = int(is_id.sum())

    fpr, tpr, _ = roc_curve(is_id, -scores, drop_intermediate=False)
    true_positives = np.rint(tpr * n_pos).astype(np.int64)
    # first point (largest threshold) with tp / n_pos >= 0.95, in integers
    index = int(np.argmax(100 * true_positives >= 95 * n_pos))
    return _percent(fpr[index])


def auroc(samples: Sequence[MatchedSample]) -> float:
    """P(ID-ness of ID > ID-ness of OOD) + 0.5 P(tie), percent"""
    scores, is_ood = _arrays(samples)
    _require_both(is_ood, "AUROC")
    return _percent(roc_auc_score(~is_ood, -scores))


def aupr(samples: Sequence[MatchedSample], positive: str = ID) -> float:
    """
    Average precision (percent) with ID (AUPR-S) or OOD (AUPR-E) as positive.

    Scores are oriented so higher = more positive; tied scores form one block.
    """
    if positive not in (ID, OOD):
        raise ValueError(f"positive must be '{ID}' or '{OOD}', got '{positive}'")
    scores, is_ood = _arrays(samples)
    if positive == ID:
        labels, oriented = ~is_ood, -scores
    else:
        labels, oriented = is_ood, scores
    if not labels.any():
        raise UndefinedMetricError(f"AUPR with positive={positive} has no positive samples")
    if labels.all():
        return 100.0
    return _percent(average_precision_score(labels, oriented))


def evaluate_method(method: str, samples: Sequence[MatchedSample], n_unmatched: int = 0) -> EvalReport:
    """All four metrics plus counts for one method"""
    _, is_ood = _arrays(samples)
    n_ood = int(is_ood.sum())
    return EvalReport(
        method=method,
        fpr95=fpr_at_95_tpr(samples),
        auroc=auroc(samples),
        aupr_s=aupr(samples, ID),
        aupr_e=aupr(samples, OOD),
        n_id=len(samples) - n_ood,
        n_ood=n_ood,
        n_unmatched_predictions=n_unmatched
    )
