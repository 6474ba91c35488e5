"""
OOD decision threshold and decision rule
"""
from enum import IntEnum
from typing import Sequence

import numpy as np

MIN_CALIBRATION_SCORES = 20


class OodDecision(IntEnum):
    ID = 0
    OOD = 1


def calibrate_threshold(
    id_scores: Sequence[float],
    target_tpr_percent: int = 95,
    min_scores: int = MIN_CALIBRATION_SCORES
) -> float:
    """
    Smallest delta with at least target_tpr_percent % of ID scores <= delta.

    Args:
        id_scores: head scores of ID objects (validation split)
        target_tpr_percent: integer percentage of ID objects to accept
        min_scores: refuse to calibrate on fewer scores

    Returns:
        delta, one of the given scores
    """
    scores = np.sort(np.asarray(id_scores, dtype=np.float64))
    n = scores.size
    if n < max(min_scores, 1):
        raise ValueError(f"need at least {max(min_scores, 1)} ID scores to calibrate, got {n}")
    if not 0 < target_tpr_percent <= 100:
        raise ValueError(f"target_tpr_percent must be in (0, 100], got {target_tpr_percent}")
    # k = ceil(target * n / 100) in integer arithmetic
    k = (target_tpr_percent * n + 99) // 100
    return float(scores[k - 1])


def classify(score: float, delta: float) -> OodDecision:
    """ID iff g(x) <= delta"""
    return OodDecision.ID if score <= delta else OodDecision.OOD


def acceptance_rate(id_scores: Sequence[float], delta: float) -> float:
    """Fraction of scores classified ID at delta"""
    scores = np.asarray(id_scores, dtype=np.float64)
    if scores.size == 0:
        return float("nan")
    return float(np.mean(scores <= delta))
