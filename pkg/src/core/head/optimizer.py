"""
SGD with momentum and weight decay, poly learning-rate schedule
"""
from typing import Dict, Iterable, Tuple

import numpy as np

from src.models.config import TrainConfig
from src.models.head import WEIGHT_NAMES


def poly_lr(step: int, total_steps: int, config: TrainConfig) -> float:
    """lr = (lr0 - lr_min) * (1 - step/total)^power + lr_min"""
    if total_steps <= 0:
        return config.lr0
    if not 0 <= step <= total_steps:
        raise ValueError(f"step {step} outside [0, {total_steps}]")
    return (config.lr0 - config.lr_min) * (1.0 - step / total_steps) ** config.poly_power + config.lr_min


def sgd_step(
    params: Dict[str, np.ndarray],
    grads: Dict[str, np.ndarray],
    velocity: Dict[str, np.ndarray],
    lr: float,
    momentum: float,
    weight_decay: float,
    decay_names: Iterable[str] = WEIGHT_NAMES
) -> Tuple[Dict[str, np.ndarray], Dict[str, np.ndarray]]:
    """
    One momentum update; inputs are not modified.

    g' = grad + weight_decay * param (weights only), v = momentum * v + g',
    param = param - lr * v.

    Returns:
        (new params, new velocity)
    """
    decay_names = set(decay_names)
    new_params = {}
    new_velocity = {}
    for name, param in params.items():
        grad = grads[name]
        if grad.shape != param.shape:
            raise ValueError(f"{name}: gradient shape {grad.shape} does not match {param.shape}")
        if name in decay_names and weight_decay:
            grad = grad + weight_decay * param
        v = momentum * velocity[name] + grad
        new_velocity[name] = v
        new_params[name] = param - lr * v
    return new_params, new_velocity
