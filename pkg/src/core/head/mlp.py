"""
OOD head forward and backward passes
"""
from dataclasses import dataclass
from typing import Dict, Optional, Union
import math

import numpy as np

from src.core.features.feature_extractor import InputBatch, stack_inputs
from src.models.detection import RawInput
from src.models.head import BOX_DIM, PARAM_NAMES, OodHeadParams
from src.utils.seeding import derive_rng

BCE_EPS = 1e-7
TRAIN = "train"
EVAL = "eval"


def init_params(
    C: int,
    K: int,
    seed: int,
    E: int = 64,
    use_box: bool = True,
    use_cls: bool = True,
    dropout_p: float = 0.3
) -> OodHeadParams:
    """
    Fresh head parameters.

    Weights ~ U[-1/sqrt(fan_in), 1/sqrt(fan_in)] drawn in PARAM_NAMES order,
    biases zero.
    """
    params = OodHeadParams(C=C, K=K, E=E, use_box=use_box, use_cls=use_cls, dropout_p=dropout_p, seed=seed)
    rng = derive_rng(seed)
    arrays = {}
    for name, shape in params.shapes().items():
        if name.startswith("b"):
            arrays[name] = np.zeros(shape)
        else:
            bound = 1.0 / math.sqrt(shape[0])
            arrays[name] = rng.uniform(-bound, bound, size=shape)
    return params.with_arrays({name: arrays[name] for name in PARAM_NAMES})


def sigmoid(z: np.ndarray) -> np.ndarray:
    e = np.exp(-np.abs(z))
    return np.where(z >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


@dataclass
class ForwardCache:
    """Intermediates kept for backward"""
    box_vec: np.ndarray
    cls_in: np.ndarray
    x: np.ndarray
    a1: np.ndarray
    h1: np.ndarray
    a2: np.ndarray
    h2: np.ndarray
    mask: Optional[np.ndarray]
    h2_drop: np.ndarray
    z: np.ndarray
    scores: np.ndarray


def _as_batch(inputs: Union[RawInput, InputBatch]) -> InputBatch:
    if isinstance(inputs, RawInput):
        return stack_inputs([inputs])
    return inputs


def forward(
    params: OodHeadParams,
    inputs: Union[RawInput, InputBatch],
    mode: str = EVAL,
    dropout_rng: Optional[np.random.Generator] = None
):
    """
    Score inputs with the head.

    F_all = [f_feat | box encoder(box_vec) | class encoder(logits | onehot)],
    then affine-ReLU-affine-ReLU-dropout-affine-sigmoid. Dropout is inverted
    and active only in train mode.

    Returns:
        (scores (N,), ForwardCache)
    """
    if mode not in (TRAIN, EVAL):
        raise ValueError(f"mode must be '{TRAIN}' or '{EVAL}', got '{mode}'")
    batch = _as_batch(inputs)
    n = len(batch)
    if batch.f_feat.shape != (n, params.C):
        raise ValueError(f"f_feat has shape {batch.f_feat.shape}, head expects C={params.C}")
    if batch.box_vec.shape != (n, BOX_DIM):
        raise ValueError(f"box_vec has shape {batch.box_vec.shape}, expected ({n}, {BOX_DIM})")
    if batch.logits.shape != (n, params.K) or batch.onehot.shape != (n, params.K):
        raise ValueError(f"logits/onehot must have K={params.K} columns, got {batch.logits.shape}")

    p = params.arrays
    cls_in = np.concatenate([batch.logits, batch.onehot], axis=1)
    parts = [batch.f_feat]
    if params.use_box:
        parts.append(batch.box_vec @ p["w_box"] + p["b_box"])
    if params.use_cls:
        parts.append(cls_in @ p["w_cls"] + p["b_cls"])
    x = np.concatenate(parts, axis=1)

    a1 = x @ p["w1"] + p["b1"]
    h1 = np.maximum(a1, 0.0)
    a2 = h1 @ p["w2"] + p["b2"]
    h2 = np.maximum(a2, 0.0)

    mask = None
    h2_drop = h2
    if mode == TRAIN and params.dropout_p > 0:
        if dropout_rng is None:
            raise ValueError("train mode with dropout needs a dropout_rng")
        keep = 1.0 - params.dropout_p
        mask = (dropout_rng.random(h2.shape) < keep) / keep
        h2_drop = h2 * mask

    z = (h2_drop @ p["w3"] + p["b3"])[:, 0]
    scores = sigmoid(z)
    cache = ForwardCache(
        box_vec=batch.box_vec, cls_in=cls_in, x=x,
        a1=a1, h1=h1, a2=a2, h2=h2, mask=mask, h2_drop=h2_drop,
        z=z, scores=scores
    )
    return scores, cache


def score(params: OodHeadParams, inputs: Union[RawInput, InputBatch]) -> np.ndarray:
    """Eval-mode scores g(x) in [0, 1]"""
    return forward(params, inputs, EVAL)[0]


def bce_loss(score, label):
    """Binary cross-entropy with OOD = 1; scores are clamped to [eps, 1 - eps]"""
    s = np.clip(np.asarray(score, dtype=np.float64), BCE_EPS, 1.0 - BCE_EPS)
    y = np.asarray(label, dtype=np.float64)
    loss = -(y * np.log(s) + (1.0 - y) * np.log(1.0 - s))
    return float(loss) if loss.ndim == 0 else loss


def batch_loss(scores: np.ndarray, labels: np.ndarray) -> float:
    """Mean BCE over the batch"""
    return float(np.mean(bce_loss(scores, labels)))


def backward(params: OodHeadParams, cache: ForwardCache, labels) -> Dict[str, np.ndarray]:
    """
    Gradient of the batch-mean BCE with respect to every parameter array.

    Uses d loss / d z = (sigmoid(z) - y) / N and the dropout mask from the
    cache.
    """
    p = params.arrays
    y = np.asarray(labels, dtype=np.float64).reshape(-1)
    n = y.size
    dz = ((cache.scores - y) / n)[:, None]

    grads = {}
    grads["w3"] = cache.h2_drop.T @ dz
    grads["b3"] = dz.sum(axis=0)
    dh2 = dz @ p["w3"].T
    if cache.mask is not None:
        dh2 = dh2 * cache.mask
    da2 = dh2 * (cache.a2 > 0)
    grads["w2"] = cache.h1.T @ da2
    grads["b2"] = da2.sum(axis=0)
    dh1 = da2 @ p["w2"].T
    da1 = dh1 * (cache.a1 > 0)
    grads["w1"] = cache.x.T @ da1
    grads["b1"] = da1.sum(axis=0)

    dx = da1 @ p["w1"].T
    offset = params.C
    e_box = p["b_box"].size
    e_cls = p["b_cls"].size
    d_box = dx[:, offset:offset + e_box]
    d_cls = dx[:, offset + e_box:offset + e_box + e_cls]
    grads["w_box"] = cache.box_vec.T @ d_box
    grads["b_box"] = d_box.sum(axis=0)
    grads["w_cls"] = cache.cls_in.T @ d_cls
    grads["b_cls"] = d_cls.sum(axis=0)
    return {name: grads[name] for name in PARAM_NAMES}
