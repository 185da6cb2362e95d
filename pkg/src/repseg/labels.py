"""Supervision targets synthesized from repetition annotations.

Three targets, one per model head: a binary boundary sequence (1 on
frames outside any repetition), a per-frame density map (one Gaussian
bump per repetition, each normalized to unit mass so the map sums to
the repetition count), and the scalar count itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .skeleton_io import RepetitionAnnotation

SIGMA_FRACTION_DEFAULT = 1.0 / 6.0


@dataclass(frozen=True)
class LabelBundle:
    """All three supervision targets for one annotated sequence."""

    binary: np.ndarray
    density: np.ndarray
    count: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "binary", np.asarray(self.binary, dtype=np.float64))
        object.__setattr__(self, "density", np.asarray(self.density, dtype=np.float64))


def binary_labels(ann: RepetitionAnnotation) -> np.ndarray:
    """Per-frame indicator of being outside every repetition segment.

    Frames inside any ``[start, end)`` segment are 0; all other frames,
    including those before the first repetition and after the last, are 1.
    """
    out = np.ones(ann.sequence_length, dtype=np.float64)
    for start, end in ann.segments:
        out[start:end] = 0.0
    return out


def density_map(
    ann: RepetitionAnnotation,
    sigma_fraction: float = SIGMA_FRACTION_DEFAULT,
) -> np.ndarray:
    """Per-frame repetition density: one renormalized Gaussian per segment.

    Each segment ``[start, end)`` contributes a Gaussian with mean
    ``(start + end - 1) / 2`` (the midpoint of its frame indices) and
    standard deviation ``sigma_fraction * (end - start)``, evaluated on the
    segment's frames only and rescaled so its mass is exactly 1. The full
    map therefore sums to the repetition count, and is 0 outside segments.
    """
    if sigma_fraction <= 0.0:
        raise ValueError(f"sigma_fraction must be positive, got {sigma_fraction}")
    out = np.zeros(ann.sequence_length, dtype=np.float64)
    for start, end in ann.segments:
        t = np.arange(start, end, dtype=np.float64)
        mu = (start + end - 1) / 2.0
        sigma = sigma_fraction * (end - start)
        z = (t - mu) / sigma
        bump = np.exp(-0.5 * z * z)
        out[start:end] = bump / bump.sum()
    return out


def count_label(ann: RepetitionAnnotation) -> int:
    """Number of annotated repetitions."""
    return ann.count()


def make_bundle(
    ann: RepetitionAnnotation,
    sigma_fraction: float = SIGMA_FRACTION_DEFAULT,
) -> LabelBundle:
    return LabelBundle(
        binary=binary_labels(ann),
        density=density_map(ann, sigma_fraction),
        count=count_label(ann),
    )
