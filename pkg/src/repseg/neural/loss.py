"""Combined KL + L1 training loss and its gradient w.r.t. predictions.

The KL term compares sum-normalized, epsilon-smoothed versions of the
target and prediction vectors; the L1 term is a plain mean absolute
error. The count head trains on L1 between the summed prediction and
the scalar count, with no KL term.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import LengthMismatch


@dataclass(frozen=True)
class LossConfig:
    kl_weight: float = 1.0
    l1_weight: float = 1.0
    epsilon: float = 1e-8

    def __post_init__(self) -> None:
        if self.kl_weight < 0.0 or self.l1_weight < 0.0:
            raise ValueError("loss weights must be nonnegative")
        if self.kl_weight + self.l1_weight <= 0.0:
            raise ValueError("at least one loss weight must be positive")
        if self.epsilon <= 0.0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")


def _check_lengths(pred: np.ndarray, target: np.ndarray) -> None:
    if pred.shape != target.shape or pred.ndim != 1:
        raise LengthMismatch(
            f"prediction shape {pred.shape} does not match target shape {target.shape}"
        )


def combined_loss(pred: np.ndarray, target: np.ndarray, cfg: LossConfig) -> float:
    """kl_weight * KL(norm(target+eps) || norm(pred+eps)) + l1_weight * mean|pred-target|."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    _check_lengths(pred, target)
    total = 0.0
    if cfg.kl_weight > 0.0:
        q = target + cfg.epsilon
        q = q / q.sum()
        r = pred + cfg.epsilon
        r = r / r.sum()
        total += cfg.kl_weight * float(np.sum(q * np.log(q / r)))
    if cfg.l1_weight > 0.0:
        total += cfg.l1_weight * float(np.mean(np.abs(pred - target)))
    return total


def combined_loss_grad(
    pred: np.ndarray, target: np.ndarray, cfg: LossConfig
) -> tuple[float, np.ndarray]:
    """Loss value and its gradient w.r.t. pred.

    KL gradient per element: kl_weight * (1/s - q_k/(pred_k+eps)) with
    s = sum(pred+eps) and q the normalized smoothed target. L1 gradient:
    l1_weight * sign(pred-target)/T.
    """
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    _check_lengths(pred, target)
    total = 0.0
    grad = np.zeros_like(pred)
    if cfg.kl_weight > 0.0:
        pe = pred + cfg.epsilon
        s = pe.sum()
        q = target + cfg.epsilon
        q = q / q.sum()
        total += cfg.kl_weight * float(np.sum(q * np.log(q / (pe / s))))
        grad += cfg.kl_weight * (1.0 / s - q / pe)
    if cfg.l1_weight > 0.0:
        diff = pred - target
        total += cfg.l1_weight * float(np.mean(np.abs(diff)))
        grad += (cfg.l1_weight / pred.size) * np.sign(diff)
    return total, grad


def count_loss(pred: np.ndarray, count: float, cfg: LossConfig) -> float:
    """l1_weight * |sum(pred) - count|; the KL term does not apply to a scalar."""
    pred = np.asarray(pred, dtype=np.float64)
    return cfg.l1_weight * float(abs(pred.sum() - count))


def count_loss_grad(
    pred: np.ndarray, count: float, cfg: LossConfig
) -> tuple[float, np.ndarray]:
    pred = np.asarray(pred, dtype=np.float64)
    diff = pred.sum() - count
    grad = np.full_like(pred, cfg.l1_weight * np.sign(diff))
    return cfg.l1_weight * float(abs(diff)), grad
