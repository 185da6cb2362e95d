"""Per-sample training loop: forward, analytic backward, Adam update.

Sequences vary in length, so updates use batch size one; each epoch
visits every sample once in a seeded shuffled order, which makes runs
bit-reproducible given the model seed and the shuffle seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch, EmptyInput, NonFiniteGradient
from ..features import FeatureSequence
from ..labels import LabelBundle
from .loss import LossConfig, combined_loss_grad, count_loss_grad
from .model import SequenceModel, backward, forward_with_cache
from .optim import OptimizerState, adam_step


@dataclass(frozen=True)
class TrainSchedule:
    epochs: int = 10
    learning_rate: float = 1e-3
    shuffle_seed: int = 0

    def __post_init__(self) -> None:
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")
        if self.learning_rate < 0.0:
            raise ValueError(f"learning_rate must be >= 0, got {self.learning_rate}")


@dataclass(frozen=True)
class TrainingLog:
    epoch_losses: tuple[float, ...]
    n_samples: int


def target_for_head(bundle: LabelBundle, head: str) -> np.ndarray | float:
    if head == "binary":
        return bundle.binary
    if head == "density":
        return bundle.density
    if head == "count":
        return float(bundle.count)
    raise ValueError(f"unknown head {head!r}")


def backward_and_step(
    model: SequenceModel,
    feats: FeatureSequence | np.ndarray,
    target: np.ndarray | float,
    loss_cfg: LossConfig,
    opt: OptimizerState,
) -> float:
    """One gradient step on one sample; returns the pre-update loss."""
    y, cache = forward_with_cache(model, feats)
    if model.config.head == "count":
        loss, dy = count_loss_grad(y, float(target), loss_cfg)
    else:
        loss, dy = combined_loss_grad(y, np.asarray(target, dtype=np.float64), loss_cfg)
    grads = backward(model, cache, dy)
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradient(f"non-finite gradient in parameter {name!r}")
    adam_step(model.params, grads, opt)
    return loss


def _feature_dim(feats: FeatureSequence | np.ndarray) -> int:
    return feats.dim if isinstance(feats, FeatureSequence) else np.asarray(feats).shape[1]


def train(
    model: SequenceModel,
    dataset: list[tuple[FeatureSequence, LabelBundle]],
    schedule: TrainSchedule,
    loss_cfg: LossConfig = LossConfig(),
) -> TrainingLog:
    """Train in place over the dataset; returns per-epoch mean losses."""
    if not dataset:
        raise EmptyInput("training dataset is empty")
    for feats, _ in dataset:
        if _feature_dim(feats) != model.config.input_dim:
            raise DimensionMismatch(
                f"sample has {_feature_dim(feats)} features per frame, "
                f"model expects {model.config.input_dim}"
            )
    head = model.config.head
    targets = [target_for_head(bundle, head) for _, bundle in dataset]
    opt = OptimizerState(learning_rate=schedule.learning_rate)
    rng = np.random.default_rng(schedule.shuffle_seed)
    losses: list[float] = []
    for _ in range(schedule.epochs):
        order = rng.permutation(len(dataset))
        total = 0.0
        for idx in order:
            total += backward_and_step(model, dataset[idx][0], targets[idx], loss_cfg, opt)
        losses.append(total / len(dataset))
    return TrainingLog(epoch_losses=tuple(losses), n_samples=len(dataset))
