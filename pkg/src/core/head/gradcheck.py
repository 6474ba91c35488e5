"""
Central finite-difference check of the OOD head gradients
"""
from typing import Dict, Optional

import numpy as np

from src.core.features.feature_extractor import InputBatch
from src.core.head.mlp import TRAIN, backward, batch_loss, forward
from src.models.head import OodHeadParams
from src.utils.seeding import derive_rng

# relative errors are taken against max(|analytic|, |numeric|, REL_FLOOR)
REL_FLOOR = 1e-5


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> np.ndarray:
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), REL_FLOOR)
    return np.abs(analytic - numeric) / denom


def numeric_gradients(
    params: OodHeadParams,
    batch: InputBatch,
    labels: np.ndarray,
    mask_seed: int = 0,
    step: float = 1e-6,
    max_entries: Optional[int] = None,
    rng: Optional[np.random.Generator] = None
) -> Dict[str, Dict[int, float]]:
    """
    Central differences of the batch loss.

    The dropout mask is held fixed by rebuilding the same stream for every
    evaluation. With max_entries, only that many random entries per array are
    probed.

    Returns:
        {name: {flat index: derivative}}
    """
    def loss(arrays):
        scores, _ = forward(params.with_arrays(arrays), batch, TRAIN, derive_rng(mask_seed))
        return batch_loss(scores, labels)

    arrays = {name: arr.copy() for name, arr in params.arrays.items()}
    result = {}
    for name, arr in arrays.items():
        flat = arr.reshape(-1)
        indices = np.arange(flat.size)
        if max_entries is not None and flat.size > max_entries:
            indices = (rng or derive_rng(mask_seed, 1)).choice(flat.size, size=max_entries, replace=False)
        derivs = {}
        for i in indices:
            original = flat[i]
            flat[i] = original + step
            up = loss(arrays)
            flat[i] = original - step
            down = loss(arrays)
            flat[i] = original
            derivs[int(i)] = (up - down) / (2.0 * step)
        result[name] = derivs
    return result


def max_relative_error(
    params: OodHeadParams,
    batch: InputBatch,
    labels: np.ndarray,
    mask_seed: int = 0,
    step: float = 1e-6,
    max_entries: Optional[int] = None
) -> float:
    """Worst relative error between backward() and central differences"""
    _, cache = forward(params, batch, TRAIN, derive_rng(mask_seed))
    analytic = backward(params, cache, labels)
    numeric = numeric_gradients(params, batch, labels, mask_seed, step, max_entries)
    worst = 0.0
    for name, derivs in numeric.items():
        if not derivs:
            continue
        idx = np.fromiter(derivs.keys(), dtype=np.int64)
        num = np.fromiter(derivs.values(), dtype=np.float64)
        ana = analytic[name].reshape(-1)[idx]
        worst = max(worst, float(relative_error(ana, num).max()))
    return worst
