"""Per-frame feature extraction from skeleton sequences.

Three variants feed the sequence models: flattened raw joints, joint-angle
features, and their concatenation. Angles come in two flavors: the interior
angle of a joint triplet (at the middle joint) and the angle of a bone
segment against the vertical (+y) axis. All angles are radians in [0, pi].
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import DimensionMismatch, EmptyInput, LengthMismatch, MalformedRow, OutOfRangeSegment
from .skeleton_io import SkeletonSequence

FEATURE_VARIANTS = ("raw", "angles", "concat")

VERTICAL_AXIS = np.array([0.0, 1.0, 0.0])
DEGENERATE_NORM = 1e-9


@dataclass(frozen=True)
class AngleEntry:
    """One angle definition: 'triplet' uses joints (a, b, c) with the angle at
    vertex b; 'vertical' uses the segment a->b against the vertical axis."""

    type: str
    a: int
    b: int
    c: int | None = None

    def __post_init__(self):
        if self.type not in ("triplet", "vertical"):
            raise MalformedRow(f"unknown angle entry type {self.type!r}")
        if self.type == "triplet" and self.c is None:
            raise MalformedRow("triplet entry needs three joint indices")
        if self.type == "vertical" and self.c is not None:
            raise MalformedRow("vertical entry takes two joint indices")

    def joints(self) -> tuple[int, ...]:
        return (self.a, self.b, self.c) if self.type == "triplet" else (self.a, self.b)


@dataclass(frozen=True)
class AngleSpec:
    entries: tuple[AngleEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def validate_for(self, n_joints: int) -> None:
        for entry in self.entries:
            for j in entry.joints():
                if not 0 <= j < n_joints:
                    raise OutOfRangeSegment(f"angle entry joint {j} >= {n_joints}")
            if len(set(entry.joints())) != len(entry.joints()):
                raise MalformedRow(f"repeated joint in angle entry {entry}")


@dataclass(frozen=True)
class FeatureSequence:
    """T x D feature matrix with its variant tag.

    ``warnings`` flags frames where a degenerate (near zero-length) bone
    forced an angle feature to 0; None for variants without angles.
    """

    values: np.ndarray
    variant: str
    warnings: np.ndarray | None = None

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise DimensionMismatch(f"feature matrix must be 2-D, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise MalformedRow("non-finite feature value")
        if self.variant not in FEATURE_VARIANTS:
            raise MalformedRow(f"unknown feature variant {self.variant!r}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n_frames(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]


def parse_angle_spec(text: str) -> AngleSpec:
    """Load an AngleSpec from its JSON list representation."""
    entries = []
    for rec in json.loads(text):
        entries.append(
            AngleEntry(type=rec["type"], a=int(rec["a"]), b=int(rec["b"]), c=rec.get("c"))
        )
    return AngleSpec(entries=tuple(entries))


def serialize_angle_spec(spec: AngleSpec) -> str:
    records = []
    for e in spec.entries:
        rec = {"type": e.type, "a": e.a, "b": e.b}
        if e.c is not None:
            rec["c"] = e.c
        records.append(rec)
    return json.dumps(records, indent=2)


def default_angle_spec() -> AngleSpec:
    """The packaged 43-entry angle configuration for 25-joint skeletons:
    bilateral shoulder/elbow/wrist/hip/knee/ankle vertex angles plus trunk
    tilt and segment-vs-vertical angles."""
    text = resources.files("repseg.configs").joinpath("angles_default.json").read_text()
    return parse_angle_spec(text)


def raw_features(seq: SkeletonSequence) -> FeatureSequence:
    """Flatten each frame joint-major (x, y, z within each joint); D = 3J."""
    values = seq.frames.reshape(seq.n_frames, -1)
    return FeatureSequence(values=values, variant="raw")


def angle_features(seq: SkeletonSequence, spec: AngleSpec) -> FeatureSequence:
    """Evaluate each angle entry per frame; D = len(spec).

    Degenerate bones (norm < 1e-9) yield 0 and set the frame's warning flag.
    """
    spec.validate_for(seq.n_joints)
    t = seq.n_frames
    values = np.zeros((t, len(spec)), dtype=np.float64)
    warnings = np.zeros(t, dtype=bool)
    frames = seq.frames
    for k, entry in enumerate(spec.entries):
        if entry.type == "triplet":
            u = frames[:, entry.a, :] - frames[:, entry.b, :]
            v = frames[:, entry.c, :] - frames[:, entry.b, :]
        else:
            u = frames[:, entry.b, :] - frames[:, entry.a, :]
            v = np.broadcast_to(VERTICAL_AXIS, u.shape)
        nu = np.linalg.norm(u, axis=1)
        nv = np.linalg.norm(v, axis=1)
        bad = (nu < DEGENERATE_NORM) | (nv < DEGENERATE_NORM)
        denom = np.where(bad, 1.0, nu * nv)
        cosang = np.clip(np.einsum("td,td->t", u, v) / denom, -1.0, 1.0)
        values[:, k] = np.where(bad, 0.0, np.arccos(cosang))
        warnings |= bad
    return FeatureSequence(values=values, variant="angles", warnings=warnings)


def concat_features(raw: FeatureSequence, angles: FeatureSequence) -> FeatureSequence:
    """Column-concatenate raw and angle features; raw columns first."""
    if raw.n_frames != angles.n_frames:
        raise LengthMismatch(f"{raw.n_frames} raw frames vs {angles.n_frames} angle frames")
    values = np.hstack([raw.values, angles.values])
    return FeatureSequence(values=values, variant="concat", warnings=angles.warnings)


@dataclass(frozen=True)
class StandardizationStats:
    """Per-dimension mean and std fitted on pooled training frames."""

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64)
        std = np.asarray(self.std, dtype=np.float64)
        if mean.shape != std.shape or mean.ndim != 1:
            raise DimensionMismatch("mean/std must be matching 1-D vectors")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", std)


def fit_standardize(train: list[FeatureSequence]) -> StandardizationStats:
    """Fit per-dimension stats on the pooled frames of the training set only."""
    if not train:
        raise EmptyInput("cannot fit standardization on an empty training set")
    dims = {fs.dim for fs in train}
    if len(dims) != 1:
        raise DimensionMismatch(f"mixed feature dims {sorted(dims)}")
    pooled = np.vstack([fs.values for fs in train])
    mean = pooled.mean(axis=0)
    std = np.maximum(pooled.std(axis=0), 1e-6)
    return StandardizationStats(mean=mean, std=std)


def apply_standardize(stats: StandardizationStats, fs: FeatureSequence) -> FeatureSequence:
    if fs.dim != stats.mean.shape[0]:
        raise DimensionMismatch(f"feature dim {fs.dim} vs stats dim {stats.mean.shape[0]}")
    values = (fs.values - stats.mean) / stats.std
    return FeatureSequence(values=values, variant=fs.variant, warnings=fs.warnings)
