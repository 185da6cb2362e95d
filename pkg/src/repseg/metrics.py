"""Counting and segmentation metrics: MAE, OBO, IOU, MAE-F.

Counting compares integer counts; segmentation first matches predicted
to ground-truth segments one-to-one (greedy, by descending IoU), then
scores matched overlap (IOU) and boundary deviation in frames (MAE-F).
MAE is reported both absolute and normalized by the true count.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EmptyGroup, EmptyInput, LengthMismatch, NoMatchedPairs

Segment = tuple[int, int]


@dataclass(frozen=True)
class SegmentMatching:
    pairs: tuple[tuple[int, int, float], ...]  # (gt_index, pred_index, iou)
    unmatched_gt: tuple[int, ...]
    unmatched_pred: tuple[int, ...]


@dataclass(frozen=True)
class SampleMetrics:
    sample_id: str
    exercise_id: str
    gt_count: int
    pred_count: int
    iou: float | None  # None when the head produces no segments
    mae_f: float | None  # None when no pairs matched
    matched_pairs: int
    gt_segments: int
    pred_segments: int


@dataclass(frozen=True)
class MetricsReport:
    mae_abs: float
    mae_norm: float
    obo: float
    iou: float | None
    mae_f: float | None
    mae_f_coverage: float | None
    n_samples: int
    grouping: str  # overall | per_exercise

    def to_json_dict(self) -> dict:
        return {
            "mae_abs": self.mae_abs,
            "mae_norm": self.mae_norm,
            "obo": self.obo,
            "iou": self.iou,
            "mae_f": self.mae_f,
            "mae_f_coverage": self.mae_f_coverage,
            "n_samples": self.n_samples,
            "grouping": self.grouping,
        }


def count_metrics(preds: Sequence[int], gts: Sequence[int]) -> tuple[float, float, float]:
    """(mae_abs, mae_norm, obo) over paired count predictions."""
    if len(preds) != len(gts):
        raise LengthMismatch(f"{len(preds)} predictions vs {len(gts)} ground truths")
    if not preds:
        raise EmptyInput("count_metrics needs at least one sample")
    p = np.asarray(preds, dtype=np.float64)
    g = np.asarray(gts, dtype=np.float64)
    err = np.abs(p - g)
    mae_abs = float(err.mean())
    mae_norm = float((err / np.maximum(g, 1.0)).mean())
    obo = float((err <= 1.0).mean())
    return mae_abs, mae_norm, obo


def segment_iou(a: Segment, b: Segment) -> float:
    inter = min(a[1], b[1]) - max(a[0], b[0])
    if inter <= 0:
        return 0.0
    union = (a[1] - a[0]) + (b[1] - b[0]) - inter
    return inter / union


def match_segments(gt: Sequence[Segment], pred: Sequence[Segment]) -> SegmentMatching:
    """Greedy one-to-one matching in descending pairwise-IoU order.

    Ties break on (gt_index, pred_index); pairs with zero IoU never match.
    """
    candidates = []
    for gi, g in enumerate(gt):
        for pi, p in enumerate(pred):
            iou = segment_iou(g, p)
            if iou > 0.0:
                candidates.append((-iou, gi, pi))
    candidates.sort()
    taken_gt: set[int] = set()
    taken_pred: set[int] = set()
    pairs = []
    for neg_iou, gi, pi in candidates:
        if gi in taken_gt or pi in taken_pred:
            continue
        taken_gt.add(gi)
        taken_pred.add(pi)
        pairs.append((gi, pi, -neg_iou))
    pairs.sort()
    return SegmentMatching(
        pairs=tuple(pairs),
        unmatched_gt=tuple(i for i in range(len(gt)) if i not in taken_gt),
        unmatched_pred=tuple(i for i in range(len(pred)) if i not in taken_pred),
    )


def segmentation_iou(gt: Sequence[Segment], pred: Sequence[Segment]) -> float:
    """Sum of matched IoUs over max(|gt|, |pred|); empty vs empty is 1.0."""
    if not gt and not pred:
        return 1.0
    matching = match_segments(gt, pred)
    total = sum(iou for _, _, iou in matching.pairs)
    return total / max(len(gt), len(pred))


def mae_frames(gt: Sequence[Segment], pred: Sequence[Segment]) -> float:
    """Mean boundary deviation (|dstart| + |dend|)/2 over matched pairs."""
    matching = match_segments(gt, pred)
    if not matching.pairs:
        raise NoMatchedPairs(f"no overlapping segments among {len(gt)} gt and {len(pred)} pred")
    devs = [
        (abs(pred[pi][0] - gt[gi][0]) + abs(pred[pi][1] - gt[gi][1])) / 2.0
        for gi, pi, _ in matching.pairs
    ]
    return float(np.mean(devs))


def evaluate_sample(
    sample_id: str,
    exercise_id: str,
    gt_segments: Sequence[Segment],
    gt_count: int,
    pred_count: int,
    pred_segments: Sequence[Segment] | None,
) -> SampleMetrics:
    """Per-sample metric row; pred_segments None means a segment-free head."""
    if pred_segments is None:
        return SampleMetrics(
            sample_id=sample_id,
            exercise_id=exercise_id,
            gt_count=gt_count,
            pred_count=pred_count,
            iou=None,
            mae_f=None,
            matched_pairs=0,
            gt_segments=len(gt_segments),
            pred_segments=0,
        )
    matching = match_segments(gt_segments, pred_segments)
    iou = segmentation_iou(gt_segments, pred_segments)
    if matching.pairs:
        maef = mae_frames(gt_segments, pred_segments)
    else:
        maef = None
    return SampleMetrics(
        sample_id=sample_id,
        exercise_id=exercise_id,
        gt_count=gt_count,
        pred_count=pred_count,
        iou=iou,
        mae_f=maef,
        matched_pairs=len(matching.pairs),
        gt_segments=len(gt_segments),
        pred_segments=len(pred_segments),
    )


def _aggregate_one(samples: Sequence[SampleMetrics], grouping: str) -> MetricsReport:
    mae_abs, mae_norm, obo = count_metrics(
        [s.pred_count for s in samples], [s.gt_count for s in samples]
    )
    ious = [s.iou for s in samples if s.iou is not None]
    maefs = [s.mae_f for s in samples if s.mae_f is not None]
    matched = sum(s.matched_pairs for s in samples)
    possible = sum(max(s.gt_segments, s.pred_segments) for s in samples if s.iou is not None)
    coverage = None
    if any(s.iou is not None for s in samples):
        coverage = matched / possible if possible > 0 else 1.0
    return MetricsReport(
        mae_abs=mae_abs,
        mae_norm=mae_norm,
        obo=obo,
        iou=float(np.mean(ious)) if ious else None,
        mae_f=float(np.mean(maefs)) if maefs else None,
        mae_f_coverage=coverage,
        n_samples=len(samples),
        grouping=grouping,
    )


def aggregate(
    per_sample: Sequence[SampleMetrics], grouping: str = "overall"
) -> MetricsReport | dict[str, MetricsReport]:
    """Unweighted mean over samples, overall or keyed by exercise."""
    if not per_sample:
        raise EmptyGroup("no samples to aggregate")
    if grouping == "overall":
        return _aggregate_one(per_sample, "overall")
    if grouping == "per_exercise":
        out: dict[str, MetricsReport] = {}
        for ex in sorted({s.exercise_id for s in per_sample}):
            group = [s for s in per_sample if s.exercise_id == ex]
            out[ex] = _aggregate_one(group, "per_exercise")
        return out
    raise ValueError(f"grouping must be 'overall' or 'per_exercise', got {grouping!r}")
