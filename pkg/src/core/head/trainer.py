"""
OOD head training on ground-truth boxes with online outlier synthesis
"""
from dataclasses import dataclass, field
from typing import Callable, List, Sequence
import math

import numpy as np
from tqdm import tqdm

from src.core.detect.surrogate_detector import SurrogateDetector
from src.core.features.feature_extractor import InputBatch, make_training_inputs, stack_inputs
from src.core.head.mlp import TRAIN, backward, batch_loss, forward, init_params
from src.core.head.optimizer import poly_lr, sgd_step
from src.core.synth.outlier_synth import augment_scene_globally, synthesize_outliers
from src.models.config import HeadSection, TrainConfig
from src.models.head import OodHeadParams
from src.models.scene import Scene
from src.utils.errors import ConfigError
from src.utils.parallel import ordered_map
from src.utils.seeding import derive_rng


@dataclass
class TrainResult:
    params: OodHeadParams
    epoch_losses: List[float] = field(default_factory=list)
    epoch_ood_counts: List[int] = field(default_factory=list)
    num_inputs: int = 0


def epoch_inputs(
    scenes: Sequence[Scene],
    detector: SurrogateDetector,
    head: HeadSection,
    seed: int,
    epoch: int,
    jobs: int = 1
) -> InputBatch:
    """
    Training inputs of one epoch.

    Scene i draws its augmentation and outlier selection from the stream
    (seed, epoch, i), so every epoch sees a fresh selection.
    """
    ood_label = detector.num_classes

    def one(item):
        index, scene = item
        rng = derive_rng(seed, epoch, index)
        augmented = augment_scene_globally(scene, head.global_augment, rng)
        synthesized = synthesize_outliers(augmented, head.scaling, rng, ood_label)
        fmap = detector.feature_map(synthesized.cloud)
        return make_training_inputs(synthesized, fmap, detector.catalog)

    per_scene = ordered_map(one, list(enumerate(scenes)), jobs)
    inputs = [raw for scene_inputs in per_scene for raw in scene_inputs]
    if not inputs:
        raise ConfigError("train split has no annotated objects", path="dataset.train_scenes")
    return stack_inputs(inputs)


def train(
    scenes: Sequence[Scene],
    detector: SurrogateDetector,
    head: HeadSection,
    seed: int,
    jobs: int = 1,
    verbose: bool = True
) -> TrainResult:
    """
    Train one OOD head.

    Args:
        scenes: train split (ID objects only)
        detector: frozen surrogate providing feature maps and logits
        head: head architecture, scaling, optimizer and augmentation settings
        seed: drives init, augmentation, shuffling and dropout
        jobs: threads for per-scene input building
        verbose: show a progress bar over epochs

    Returns:
        TrainResult with final params and per-epoch mean loss
    """
    if not scenes:
        raise ConfigError("train split is empty", path="dataset.train_scenes")
    if any(scene.num_ood for scene in scenes):
        raise ConfigError("train split contains OOD annotations", path="dataset")

    params = init_params(
        detector.feature_map_channels(), detector.num_classes, seed,
        E=head.embed_dim, use_box=head.use_box, use_cls=head.use_cls, dropout_p=head.dropout_p
    )
    num_inputs = sum(len(scene.annotations) for scene in scenes)
    return optimize(
        params,
        lambda epoch: epoch_inputs(scenes, detector, head, seed, epoch, jobs),
        num_inputs,
        head.train,
        seed,
        verbose
    )


def optimize(
    params: OodHeadParams,
    batch_for_epoch: Callable[[int], InputBatch],
    num_inputs: int,
    cfg: TrainConfig,
    seed: int,
    verbose: bool = False
) -> TrainResult:
    """
    Mini-batch SGD over labeled inputs.

    Each epoch takes its inputs from batch_for_epoch(epoch), shuffles them,
    and steps through batches of cfg.batch_size with the poly schedule
    spanning all epochs.
    """
    arrays = params.arrays
    velocity = params.zeros_like()
    steps_per_epoch = math.ceil(num_inputs / cfg.batch_size)
    total_steps = cfg.epochs * steps_per_epoch
    step = 0

    result = TrainResult(params=params, num_inputs=num_inputs)
    epochs = tqdm(range(cfg.epochs), desc=f"  seed {seed}", unit="epoch", disable=not verbose, leave=False)
    for epoch in epochs:
        batch = batch_for_epoch(epoch)
        if len(batch) != num_inputs:
            raise ValueError(f"epoch {epoch} produced {len(batch)} inputs, expected {num_inputs}")
        # shuffle and dropout share one stream, consumed in batch order
        rng = derive_rng(seed, epoch)
        order = rng.permutation(len(batch))

        loss_sum = 0.0
        for start in range(0, len(batch), cfg.batch_size):
            mini = batch.take(order[start:start + cfg.batch_size])
            current = params.with_arrays(arrays)
            scores, cache = forward(current, mini, TRAIN, rng)
            loss_sum += batch_loss(scores, mini.labels) * len(mini)
            grads = backward(current, cache, mini.labels)
            lr = poly_lr(step, total_steps, cfg)
            arrays, velocity = sgd_step(arrays, grads, velocity, lr, cfg.momentum, cfg.weight_decay)
            step += 1

        mean_loss = loss_sum / len(batch)
        result.epoch_losses.append(mean_loss)
        result.epoch_ood_counts.append(int(batch.labels.sum()))
        epochs.set_postfix(loss=f"{mean_loss:.4f}")

    result.params = params.with_arrays(arrays)
    return result
