"""Skeleton sequences and repetition annotations: parsing, validation, normalization.

Interchange format (one sample = up to three files sharing a stem):
  <id>.csv        skeleton frames, header ``frame,<joint>_x,<joint>_y,<joint>_z,...``
  <id>.meta.json  optional sidecar: frame_rate, subject, exercise, dataset, population
  <id>.ann.json   annotation: ``{"length": int, "segments": [[start, end], ...], ...}``

Segments are half-open ``[start, end)`` frame intervals.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    DegenerateScale,
    EmptySequence,
    InconsistentJointCount,
    MalformedHeader,
    MalformedRow,
    OutOfRangeSegment,
    OverlappingSegments,
)

POPULATION_TAGS = ("healthy", "patient", "unknown")

# SpineBase root, SpineBase-SpineShoulder torso length as the scale reference
# (Kinect v2 indices 0 and 20).
DEFAULT_ROOT_JOINT = 0
DEFAULT_SCALE_PAIR = (0, 20)


@dataclass(frozen=True)
class SkeletonSequence:
    """T x J x 3 joint coordinates in meters plus recording metadata."""

    frames: np.ndarray
    frame_rate: float = 30.0
    subject_id: str = ""
    exercise_id: str = ""
    dataset_id: str = ""
    population_tag: str = "unknown"
    joint_names: tuple[str, ...] = ()

    def __post_init__(self):
        frames = np.array(self.frames, dtype=np.float64)
        if frames.ndim != 3 or frames.shape[2] != 3:
            raise MalformedRow(f"frames must be T x J x 3, got shape {frames.shape}")
        if frames.shape[0] < 2:
            raise EmptySequence(f"need at least 2 frames, got {frames.shape[0]}")
        if frames.shape[1] < 1:
            raise InconsistentJointCount("need at least one joint")
        if not np.all(np.isfinite(frames)):
            raise MalformedRow("non-finite coordinate in skeleton frames")
        if self.population_tag not in POPULATION_TAGS:
            raise MalformedRow(f"unknown population tag {self.population_tag!r}")
        frames.setflags(write=False)
        object.__setattr__(self, "frames", frames)
        if not self.joint_names:
            names = tuple(f"j{i}" for i in range(frames.shape[1]))
            object.__setattr__(self, "joint_names", names)
        elif len(self.joint_names) != frames.shape[1]:
            raise InconsistentJointCount(
                f"{len(self.joint_names)} joint names for {frames.shape[1]} joints"
            )

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def n_joints(self) -> int:
        return self.frames.shape[1]


@dataclass(frozen=True)
class RepetitionAnnotation:
    """Ordered, non-overlapping half-open [start, end) repetition segments."""

    segments: tuple[tuple[int, int], ...]
    sequence_length: int

    def __post_init__(self):
        segs = tuple(sorted((int(s), int(e)) for s, e in self.segments))
        for s, e in segs:
            if not (0 <= s < e <= self.sequence_length):
                raise OutOfRangeSegment(
                    f"segment ({s}, {e}) outside [0, {self.sequence_length})"
                )
        for (_, e_prev), (s_next, _) in zip(segs, segs[1:]):
            if s_next < e_prev:
                raise OverlappingSegments(f"segment starting at {s_next} overlaps previous")
        object.__setattr__(self, "segments", segs)

    def count(self) -> int:
        return len(self.segments)


@dataclass(frozen=True)
class NormalizationSpec:
    """Root-centering and scale normalization parameters."""

    root_joint_index: int = DEFAULT_ROOT_JOINT
    scale_pair: tuple[int, int] = DEFAULT_SCALE_PAIR
    enabled: bool = True

    def __post_init__(self):
        a, b = self.scale_pair
        if a == b:
            raise DegenerateScale("scale pair must be two distinct joints")


def parse_skeleton(stream: str | io.TextIOBase, meta: dict | None = None) -> SkeletonSequence:
    """Parse interchange CSV text into a SkeletonSequence.

    ``meta`` carries the sidecar record (frame_rate, subject, exercise,
    dataset, population); missing keys fall back to defaults.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise EmptySequence("empty skeleton file") from None
    joint_names = _parse_header(header)
    n_cols = 1 + 3 * len(joint_names)

    rows = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != n_cols:
            raise InconsistentJointCount(
                f"line {lineno}: expected {n_cols} cells, got {len(row)}"
            )
        try:
            values = [float(cell) for cell in row]
        except ValueError as exc:
            raise MalformedRow(f"line {lineno}: {exc}") from None
        if not all(math.isfinite(v) for v in values):
            raise MalformedRow(f"line {lineno}: non-finite value")
        rows.append(values[1:])

    if len(rows) < 2:
        raise EmptySequence(f"need at least 2 frames, got {len(rows)}")
    frames = np.asarray(rows, dtype=np.float64).reshape(len(rows), len(joint_names), 3)

    meta = meta or {}
    return SkeletonSequence(
        frames=frames,
        frame_rate=float(meta.get("frame_rate", 30.0)),
        subject_id=str(meta.get("subject", "")),
        exercise_id=str(meta.get("exercise", "")),
        dataset_id=str(meta.get("dataset", "")),
        population_tag=str(meta.get("population", "unknown")),
        joint_names=tuple(joint_names),
    )


def _parse_header(header: list[str]) -> list[str]:
    if not header or header[0].strip() != "frame":
        raise MalformedHeader("first header column must be 'frame'")
    coords = header[1:]
    if not coords or len(coords) % 3 != 0:
        raise MalformedHeader("header must declare _x,_y,_z triplets per joint")
    names = []
    for i in range(0, len(coords), 3):
        triple = [c.strip() for c in coords[i : i + 3]]
        bases = [c.rsplit("_", 1) for c in triple]
        if any(len(b) != 2 for b in bases) or [b[1] for b in bases] != ["x", "y", "z"]:
            raise MalformedHeader(f"columns {triple} are not a <joint>_x/_y/_z triplet")
        if len({b[0] for b in bases}) != 1:
            raise MalformedHeader(f"mixed joint names in triplet {triple}")
        names.append(bases[0][0])
    return names


def serialize_skeleton(seq: SkeletonSequence) -> str:
    """Inverse of parse_skeleton; coordinates survive a round trip exactly."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    header = ["frame"]
    for name in seq.joint_names:
        header += [f"{name}_x", f"{name}_y", f"{name}_z"]
    writer.writerow(header)
    flat = seq.frames.reshape(seq.n_frames, -1)
    for t in range(seq.n_frames):
        writer.writerow([t] + [f"{v:.17g}" for v in flat[t]])
    return out.getvalue()


def skeleton_meta(seq: SkeletonSequence) -> dict:
    """Sidecar record matching parse_skeleton's ``meta`` argument."""
    return {
        "frame_rate": seq.frame_rate,
        "subject": seq.subject_id,
        "exercise": seq.exercise_id,
        "dataset": seq.dataset_id,
        "population": seq.population_tag,
    }


def parse_annotation(stream: str | io.TextIOBase) -> RepetitionAnnotation:
    """Parse annotation JSON. Unsorted segments are accepted and sorted."""
    text = stream if isinstance(stream, str) else stream.read()
    try:
        record = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedRow(f"annotation is not valid JSON: {exc}") from None
    if not isinstance(record, dict) or "length" not in record or "segments" not in record:
        raise MalformedRow("annotation JSON needs 'length' and 'segments'")
    try:
        segments = tuple((int(s), int(e)) for s, e in record["segments"])
        length = int(record["length"])
    except (TypeError, ValueError) as exc:
        raise MalformedRow(f"bad annotation contents: {exc}") from None
    return RepetitionAnnotation(segments=segments, sequence_length=length)


def serialize_annotation(
    ann: RepetitionAnnotation, exercise: str = "", subject: str = ""
) -> str:
    record = {
        "length": ann.sequence_length,
        "segments": [list(seg) for seg in ann.segments],
        "exercise": exercise,
        "subject": subject,
    }
    return json.dumps(record, indent=2)


def normalize(seq: SkeletonSequence, spec: NormalizationSpec) -> SkeletonSequence:
    """Translate the root joint to the origin per frame, then divide all
    coordinates by the mean scale-pair distance over the sequence.

    A disabled spec returns the input unchanged.
    """
    if not spec.enabled:
        return seq
    j = seq.n_joints
    a, b = spec.scale_pair
    if not (0 <= spec.root_joint_index < j and 0 <= a < j and 0 <= b < j):
        raise OutOfRangeSegment("normalization joint index out of range")

    frames = seq.frames - seq.frames[:, spec.root_joint_index : spec.root_joint_index + 1, :]
    scale = float(np.mean(np.linalg.norm(frames[:, a, :] - frames[:, b, :], axis=1)))
    if scale < 1e-9:
        raise DegenerateScale(f"mean scale-pair distance {scale:.3e} below 1e-9")
    return replace(seq, frames=frames / scale)
