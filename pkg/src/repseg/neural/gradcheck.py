"""Finite-difference verification of every analytic gradient.

Central differences at 64-bit precision, elementwise over every
parameter tensor. Relative error uses |a| + |n| in the denominator with
a small floor so that matching near-zero gradients compare as equal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .loss import LossConfig, combined_loss, combined_loss_grad, count_loss, count_loss_grad
from .model import ModelConfig, backward, forward, forward_with_cache, init_model

REL_ERROR_FLOOR = 1e-5


@dataclass(frozen=True)
class GradCheckReport:
    per_tensor: dict[str, float]
    max_rel_error: float
    tolerance: float
    passed: bool


def _make_target(head: str, n_frames: int, rng: np.random.Generator) -> np.ndarray | float:
    if head == "binary":
        return (rng.random(n_frames) < 0.5).astype(np.float64)
    if head == "density":
        return rng.random(n_frames) * 0.2
    return float(rng.integers(1, 8))


def grad_check(
    config: ModelConfig,
    n_frames: int = 20,
    tolerance: float = 1e-4,
    seed: int = 0,
    step: float = 1e-5,
) -> GradCheckReport:
    model = init_model(config)
    rng = np.random.default_rng(seed + 1)
    x = rng.normal(size=(n_frames, config.input_dim))
    target = _make_target(config.head, n_frames, rng)
    loss_cfg = LossConfig()

    def loss_at() -> float:
        y = forward(model, x)
        if config.head == "count":
            return count_loss(y, target, loss_cfg)
        return combined_loss(y, target, loss_cfg)

    y, cache = forward_with_cache(model, x)
    if config.head == "count":
        _, dy = count_loss_grad(y, target, loss_cfg)
    else:
        _, dy = combined_loss_grad(y, target, loss_cfg)
    grads = backward(model, cache, dy)

    per_tensor: dict[str, float] = {}
    for name, p in model.params.items():
        numeric = np.empty_like(p)
        flat_p = p.ravel()
        flat_n = numeric.ravel()
        for j in range(flat_p.size):
            orig = flat_p[j]
            flat_p[j] = orig + step
            loss_plus = loss_at()
            flat_p[j] = orig - step
            loss_minus = loss_at()
            flat_p[j] = orig
            flat_n[j] = (loss_plus - loss_minus) / (2.0 * step)
        analytic = grads[name]
        rel = np.abs(analytic - numeric) / np.maximum(
            np.abs(analytic) + np.abs(numeric), REL_ERROR_FLOOR
        )
        per_tensor[name] = float(rel.max())
    max_rel_error = max(per_tensor.values())
    return GradCheckReport(
        per_tensor=per_tensor,
        max_rel_error=max_rel_error,
        tolerance=tolerance,
        passed=max_rel_error < tolerance,
    )
