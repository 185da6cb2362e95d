"""Kinematic synthesizer: exact-by-construction exercise recordings.

A rest-pose 25-joint skeleton is animated by rotating limb chains about
pivot joints. Each repetition is a sinusoidal half-cycle of the chain
angle (rise and return within the segment), separated by dwell gaps at
rest, so annotation segments cover exactly the moving frames. Gaussian
coordinate noise and per-rep duration/amplitude jitter are applied on
top.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.transform import Rotation

from ..skeleton_io import RepetitionAnnotation, SkeletonSequence

# Standing pose, meters, y up: spine 0-3, left arm 4-7, right arm 8-11,
# left leg 12-15, right leg 16-19, spine-shoulder 20, hand tips/thumbs 21-24.
REST_POSE = np.array(
    [
        [0.00, 0.90, 0.00],
        [0.00, 1.15, 0.00],
        [0.00, 1.40, 0.00],
        [0.00, 1.55, 0.00],
        [-0.20, 1.35, 0.00],
        [-0.25, 1.10, 0.00],
        [-0.27, 0.88, 0.00],
        [-0.28, 0.82, 0.00],
        [0.20, 1.35, 0.00],
        [0.25, 1.10, 0.00],
        [0.27, 0.88, 0.00],
        [0.28, 0.82, 0.00],
        [-0.10, 0.85, 0.00],
        [-0.12, 0.45, 0.00],
        [-0.13, 0.08, 0.00],
        [-0.13, 0.02, 0.08],
        [0.10, 0.85, 0.00],
        [0.12, 0.45, 0.00],
        [0.13, 0.08, 0.00],
        [0.13, 0.02, 0.08],
        [0.00, 1.30, 0.00],
        [-0.29, 0.76, 0.00],
        [-0.25, 0.80, 0.03],
        [0.29, 0.76, 0.00],
        [0.25, 0.80, 0.03],
    ]
)

JOINT_NAMES = (
    "spine_base",
    "spine_mid",
    "neck",
    "head",
    "shoulder_left",
    "elbow_left",
    "wrist_left",
    "hand_left",
    "shoulder_right",
    "elbow_right",
    "wrist_right",
    "hand_right",
    "hip_left",
    "knee_left",
    "ankle_left",
    "foot_left",
    "hip_right",
    "knee_right",
    "ankle_right",
    "foot_right",
    "spine_shoulder",
    "hand_tip_left",
    "thumb_left",
    "hand_tip_right",
    "thumb_right",
)

# exercise -> list of (pivot joint, moved chain, rotation axis, base amplitude rad)
MOTION_TEMPLATES: dict[str, list[tuple[int, tuple[int, ...], tuple[float, float, float], float]]] = {
    "arm_raise": [
        (4, (5, 6, 7, 21, 22), (0.0, 0.0, -1.0), 1.9),
        (8, (9, 10, 11, 23, 24), (0.0, 0.0, 1.0), 1.9),
    ],
    "arm_curl": [
        (5, (6, 7, 21, 22), (-1.0, 0.0, 0.0), 2.0),
        (9, (10, 11, 23, 24), (-1.0, 0.0, 0.0), 2.0),
    ],
    "torso_bend": [
        (0, (1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 20, 21, 22, 23, 24), (1.0, 0.0, 0.0), 0.8),
    ],
}


@dataclass(frozen=True)
class SynthParams:
    n_sequences: int = 10
    reps_range: tuple[int, int] = (3, 12)
    rep_duration_frames: tuple[float, float] = (26.0, 8.0)  # (mean, jitter)
    gap_frames: tuple[float, float] = (12.0, 5.0)  # (mean, jitter)
    joint_noise_std: float = 0.01
    amplitude_variation: float = 0.2
    frame_rate: float = 30.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_sequences < 1:
            raise ValueError(f"n_sequences must be >= 1, got {self.n_sequences}")
        lo, hi = self.reps_range
        if lo < 1 or lo > hi:
            raise ValueError(f"reps_range must satisfy 1 <= min <= max, got {self.reps_range}")
        if self.rep_duration_frames[0] <= 0 or self.gap_frames[0] <= 0:
            raise ValueError("rep_duration_frames and gap_frames means must be positive")
        if self.rep_duration_frames[1] < 0 or self.gap_frames[1] < 0:
            raise ValueError("jitters must be nonnegative")
        if self.joint_noise_std < 0:
            raise ValueError(f"joint_noise_std must be >= 0, got {self.joint_noise_std}")
        if not 0 <= self.amplitude_variation < 1:
            raise ValueError(
                f"amplitude_variation must be in [0, 1), got {self.amplitude_variation}"
            )
        if self.frame_rate <= 0:
            raise ValueError(f"frame_rate must be positive, got {self.frame_rate}")


def _jittered_lengths(rng: np.random.Generator, n: int, mean: float, jitter: float, floor: int) -> list[int]:
    raw = mean + rng.uniform(-jitter, jitter, size=n)
    return [max(floor, int(round(v))) for v in raw]


def _animate(
    exercise: str,
    durations: list[int],
    gaps: list[int],
    amp_factors: list[float],
) -> tuple[np.ndarray, list[tuple[int, int]]]:
    total = sum(durations) + sum(gaps)
    frames = np.tile(REST_POSE, (total, 1, 1))
    segments: list[tuple[int, int]] = []
    cursor = gaps[0]
    for r, dur in enumerate(durations):
        start, end = cursor, cursor + dur
        segments.append((start, end))
        # half-cycle angle, strictly inside the segment and zero at rest
        u = (np.arange(dur) + 0.5) / dur
        half_cycle = np.sin(np.pi * u)
        for pivot, chain, axis, base_amp in MOTION_TEMPLATES[exercise]:
            theta = amp_factors[r] * base_amp * half_cycle
            rots = Rotation.from_rotvec(np.outer(theta, np.asarray(axis, dtype=np.float64)))
            pivot_pos = REST_POSE[pivot]
            for j in chain:
                frames[start:end, j] = pivot_pos + rots.apply(REST_POSE[j] - pivot_pos)
        cursor = end + gaps[r + 1]
    return frames, segments


def synth_generate(params: SynthParams) -> list[tuple[SkeletonSequence, RepetitionAnnotation]]:
    """Generate n_sequences recordings with exact repetition annotations."""
    rng = np.random.default_rng(params.seed)
    exercises = sorted(MOTION_TEMPLATES)
    out: list[tuple[SkeletonSequence, RepetitionAnnotation]] = []
    for i in range(params.n_sequences):
        exercise = exercises[i % len(exercises)]
        subject_idx = i % 8
        subject = f"s{subject_idx:02d}"
        population = "healthy" if subject_idx % 2 == 0 else "patient"
        reps = int(rng.integers(params.reps_range[0], params.reps_range[1] + 1))
        durations = _jittered_lengths(
            rng, reps, params.rep_duration_frames[0], params.rep_duration_frames[1], floor=4
        )
        gaps = _jittered_lengths(
            rng, reps + 1, params.gap_frames[0], params.gap_frames[1], floor=1
        )
        amp_factors = [
            1.0 + rng.uniform(-params.amplitude_variation, params.amplitude_variation)
            for _ in range(reps)
        ]
        frames, segments = _animate(exercise, durations, gaps, amp_factors)
        if params.joint_noise_std > 0:
            frames = frames + rng.normal(0.0, params.joint_noise_std, size=frames.shape)
        seq = SkeletonSequence(
            frames=frames,
            frame_rate=params.frame_rate,
            subject_id=subject,
            exercise_id=exercise,
            dataset_id="synth",
            population_tag=population,
            joint_names=JOINT_NAMES,
        )
        ann = RepetitionAnnotation(segments=tuple(segments), sequence_length=frames.shape[0])
        out.append((seq, ann))
    return out
