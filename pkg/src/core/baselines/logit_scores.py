"""
Post-hoc baseline OOD scores from detection logits

Every score is OOD-oriented: higher = more OOD. Confidence-style outputs
are negated.
"""
from typing import Callable, Dict

import numpy as np

from src.models.detection import Detection

ODIN_TEMPERATURE = 1000.0
ENERGY_TEMPERATURE = 1.0


def _as_logits(logits) -> np.ndarray:
    arr = np.asarray(logits, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError(f"logits must be a non-empty vector, got shape {arr.shape}")
    return arr


def _max_softmax(logits: np.ndarray) -> float:
    shifted = logits - np.max(logits)
    exps = np.exp(shifted)
    return float(exps.max() / exps.sum())


def msp(logits) -> float:
    """Score: -max(softmax(logits))"""
    return -_max_softmax(_as_logits(logits))


def odin(logits) -> float:
    """Temperature-scaled MSP, T = 1000, no input perturbation"""
    return -_max_softmax(_as_logits(logits) / ODIN_TEMPERATURE)


def max_logit(logits) -> float:
    return -float(np.max(_as_logits(logits)))


def energy(logits) -> float:
    """E = -T * logsumexp(logits / T); higher energy = more OOD"""
    z = _as_logits(logits) / ENERGY_TEMPERATURE
    m = np.max(z)
    return -ENERGY_TEMPERATURE * float(m + np.log(np.sum(np.exp(z - m))))


def default_score(detection: Detection) -> float:
    """Negated detector confidence"""
    return -float(detection.score)


LOGIT_METHODS: Dict[str, Callable[[np.ndarray], float]] = {
    "msp": msp,
    "odin": odin,
    "max_logit": max_logit,
    "energy": energy,
}


def baseline_score(method: str, detection: Detection) -> float:
    """OOD-ness of a detection under a named baseline"""
    if method == "default":
        return default_score(detection)
    if method not in LOGIT_METHODS:
        raise ValueError(f"unknown baseline '{method}', expected one of {sorted(LOGIT_METHODS) + ['default']}")
    return LOGIT_METHODS[method](detection.logits)
