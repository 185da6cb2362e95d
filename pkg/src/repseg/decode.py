"""Turn per-frame model outputs into repetition segments and counts.

Binary head: threshold, run-length decode, drop short candidates, merge
candidates separated by too-small gaps. Density head: peak picking with
prominence relative to the map maximum, then boundary recovery at
valleys. Boundaries recover annotation segments exactly when segments
are separated (or bordered at the window edge) by zero-density gaps;
directly adjacent segments may shift a shared boundary by one frame.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks

SOURCES = ("binary", "density", "count_head")


@dataclass(frozen=True)
class DecodeParams:
    binary_threshold: float = 0.5
    min_segment_frames: int = 5
    min_gap_frames: int = 1
    peak_min_prominence: float = 0.05  # fraction of the map maximum
    peak_min_distance_frames: int = 10

    def __post_init__(self) -> None:
        if not 0.0 < self.binary_threshold < 1.0:
            raise ValueError(f"binary_threshold must be in (0,1), got {self.binary_threshold}")
        if self.min_segment_frames < 0 or self.min_gap_frames < 0:
            raise ValueError("min_segment_frames and min_gap_frames must be nonnegative")
        if self.peak_min_prominence < 0.0:
            raise ValueError(f"peak_min_prominence must be >= 0, got {self.peak_min_prominence}")
        if self.peak_min_distance_frames < 0:
            raise ValueError(
                f"peak_min_distance_frames must be >= 0, got {self.peak_min_distance_frames}"
            )


@dataclass(frozen=True)
class SegmentPrediction:
    segments: tuple[tuple[int, int], ...]
    count: int
    source: str
    confidences: tuple[float, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.source not in SOURCES:
            raise ValueError(f"source must be one of {SOURCES}, got {self.source!r}")
        segs = tuple((int(s), int(e)) for s, e in self.segments)
        object.__setattr__(self, "segments", segs)
        prev_end = None
        for start, end in segs:
            if start >= end:
                raise ValueError(f"segment ({start},{end}) is empty or reversed")
            if prev_end is not None and start < prev_end:
                raise ValueError("segments must be sorted and non-overlapping")
            prev_end = end
        if self.source != "count_head" and self.count != len(segs):
            raise ValueError(
                f"count {self.count} does not match {len(segs)} segments for source {self.source!r}"
            )

    def to_json_dict(self) -> dict:
        return {
            "segments": [list(s) for s in self.segments],
            "count": self.count,
            "source": self.source,
            "confidences": list(self.confidences),
        }


def segments_from_binary(probs: np.ndarray, params: DecodeParams) -> SegmentPrediction:
    """Run-length decode of boundary probabilities (1 = outside a repetition)."""
    probs = np.asarray(probs, dtype=np.float64)
    inside = probs < params.binary_threshold
    candidates: list[list[int]] = []
    start = None
    for t, flag in enumerate(inside):
        if flag and start is None:
            start = t
        elif not flag and start is not None:
            candidates.append([start, t])
            start = None
    if start is not None:
        candidates.append([start, len(inside)])
    kept = [c for c in candidates if c[1] - c[0] >= params.min_segment_frames]
    merged: list[list[int]] = []
    for cand in kept:
        if merged and cand[0] - merged[-1][1] < params.min_gap_frames:
            merged[-1][1] = cand[1]
        else:
            merged.append(cand)
    segments = tuple((s, e) for s, e in merged)
    confidences = tuple(float(np.mean(1.0 - probs[s:e])) for s, e in segments)
    return SegmentPrediction(
        segments=segments, count=len(segments), source="binary", confidences=confidences
    )


def _min_runs(x: np.ndarray) -> list[tuple[int, int]]:
    """Maximal equal-value runs [a,b] (inclusive) that are local minima.

    A run qualifies when each existing neighbor is strictly greater; the
    array edge counts as a missing neighbor, so a run touching an edge
    qualifies on the strength of its other side alone.
    """
    n = len(x)
    runs: list[tuple[int, int]] = []
    a = 0
    for b in range(n):
        if b + 1 < n and x[b + 1] == x[a]:
            continue
        left_ok = a == 0 or x[a - 1] > x[a]
        right_ok = b == n - 1 or x[b + 1] > x[b]
        if left_ok and right_ok and not (a == 0 and b == n - 1):
            runs.append((a, b))
        a = b + 1
    return runs


def _left_boundary(min_runs: list[tuple[int, int]], peak: int, prev_peak: int | None, n: int) -> int:
    # valley candidate: nearest qualifying run left of the peak, taking its
    # frame closest to the peak; array-edge frames are never valley frames
    valley = None
    for a, b in reversed(min_runs):
        if b < peak and (prev_peak is None or a > prev_peak):
            if b != 0 and b != n - 1:
                valley = b
            break
    midpoint = None if prev_peak is None else (prev_peak + peak) // 2
    if valley is None and midpoint is None:
        return 0
    if valley is None:
        return midpoint + 1
    if midpoint is not None and (peak - midpoint) < (peak - valley):
        return midpoint + 1
    return valley + 1


def _right_boundary(min_runs: list[tuple[int, int]], peak: int, next_peak: int | None, n: int) -> int:
    valley = None
    for a, b in min_runs:
        if a > peak and (next_peak is None or b < next_peak):
            if a != 0 and a != n - 1:
                valley = a
            break
    midpoint = None if next_peak is None else (peak + next_peak) // 2
    if valley is None and midpoint is None:
        return n
    if valley is None:
        return midpoint
    if midpoint is not None and (midpoint - peak) < (valley - peak):
        return midpoint
    return valley


def segments_from_density(density: np.ndarray, params: DecodeParams) -> SegmentPrediction:
    """Peak-picked segments from a nonnegative density map.

    Peaks need a prominence of at least peak_min_prominence times the map
    maximum and a separation of peak_min_distance_frames. Each peak extends
    to the nearest valley on either side, or to the midpoint toward the
    adjacent peak when that is closer.
    """
    density = np.asarray(density, dtype=np.float64)
    top = density.max() if density.size else 0.0
    if top <= 0.0:
        return SegmentPrediction(segments=(), count=0, source="density")
    prominence = params.peak_min_prominence * top
    peaks, _ = find_peaks(
        density,
        prominence=prominence if prominence > 0.0 else None,
        distance=max(1, params.peak_min_distance_frames),
    )
    if peaks.size == 0:
        return SegmentPrediction(segments=(), count=0, source="density")
    runs = _min_runs(density)
    n = len(density)
    segments: list[tuple[int, int]] = []
    for idx, peak in enumerate(peaks):
        prev_peak = int(peaks[idx - 1]) if idx > 0 else None
        next_peak = int(peaks[idx + 1]) if idx + 1 < len(peaks) else None
        start = _left_boundary(runs, int(peak), prev_peak, n)
        end = _right_boundary(runs, int(peak), next_peak, n)
        start = min(start, int(peak))
        end = max(end, int(peak) + 1)
        if segments and start < segments[-1][1]:
            start = segments[-1][1]
        segments.append((start, end))
    confidences = tuple(float(density[p]) for p in peaks)
    return SegmentPrediction(
        segments=tuple(segments),
        count=len(segments),
        source="density",
        confidences=confidences,
    )


def count_from_prediction(pred: SegmentPrediction | float) -> int:
    """Integer count: |segments| for decoded sources, rounded scalar otherwise.

    Scalars round half away from zero and clip at 0.
    """
    if isinstance(pred, SegmentPrediction):
        return pred.count
    return max(0, int(np.floor(float(pred) + 0.5)))
