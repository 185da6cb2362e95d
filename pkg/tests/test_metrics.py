"""Counting/segmentation metrics vs closed forms and brute-force oracles."""

import itertools

import numpy as np
import pytest

from repseg.errors import EmptyGroup, EmptyInput, LengthMismatch, NoMatchedPairs
from repseg.metrics import (
    SampleMetrics,
    aggregate,
    count_metrics,
    evaluate_sample,
    mae_frames,
    match_segments,
    segment_iou,
    segmentation_iou,
)


def _random_segments(rng, max_n=5, max_start_gap=12, max_len=20):
    """Valid sorted, non-overlapping segment list."""
    n = int(rng.integers(0, max_n + 1))
    segments = []
    cursor = 0
    for _ in range(n):
        cursor += int(rng.integers(0, max_start_gap + 1))
        length = int(rng.integers(1, max_len + 1))
        segments.append((cursor, cursor + length))
        cursor += length
    return segments


def brute_force_best_total_iou(gt, pred):
    """Max total IoU over all one-to-one assignments (permutation search)."""
    if not gt or not pred:
        return 0.0
    small, large = (gt, pred) if len(gt) <= len(pred) else (pred, gt)
    best = 0.0
    for perm in itertools.permutations(range(len(large)), len(small)):
        total = sum(segment_iou(small[i], large[j]) for i, j in enumerate(perm))
        best = max(best, total)
    return best


def test_count_metrics_examples():
    assert count_metrics([3, 5, 2], [3, 5, 2]) == (0.0, 0.0, 1.0)
    mae_abs, mae_norm, obo = count_metrics([5], [7])
    assert mae_abs == 2.0
    assert mae_norm == pytest.approx(2.0 / 7.0)
    assert obo == 0.0
    assert count_metrics([4, 6], [5, 5])[2] == 1.0  # both off by exactly one
    # gt of zero normalizes by 1, not 0
    assert count_metrics([2], [0])[1] == 2.0


def test_count_metrics_errors():
    with pytest.raises(LengthMismatch):
        count_metrics([1, 2], [1])
    with pytest.raises(EmptyInput):
        count_metrics([], [])


def test_obo_monotone_in_single_improvement():
    preds = [4, 7, 9]
    gts = [6, 7, 9]
    before = count_metrics(preds, gts)[2]
    after = count_metrics([5, 7, 9], gts)[2]  # first error improves 2 -> 1
    assert after >= before


def test_segment_iou_closed_forms():
    assert segment_iou((0, 10), (0, 10)) == 1.0
    assert segment_iou((0, 10), (5, 15)) == pytest.approx(1.0 / 3.0, abs=1e-12)
    assert segment_iou((0, 10), (10, 20)) == 0.0
    assert segment_iou((0, 4), (2, 4)) == pytest.approx(0.5)


def test_match_identical_lists():
    segs = [(0, 10), (15, 25), (30, 40)]
    matching = match_segments(segs, list(segs))
    assert matching.pairs == ((0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0))
    assert matching.unmatched_gt == ()
    assert matching.unmatched_pred == ()


def test_match_disjoint_lists():
    matching = match_segments([(0, 5)], [(10, 15)])
    assert matching.pairs == ()
    assert matching.unmatched_gt == (0,)
    assert matching.unmatched_pred == (0,)


def test_match_prefers_higher_iou():
    gt = [(0, 10)]
    pred = [(8, 20), (0, 9)]
    matching = match_segments(gt, pred)
    assert len(matching.pairs) == 1
    assert matching.pairs[0][1] == 1  # the (0,9) candidate wins
    assert matching.unmatched_pred == (0,)


def test_match_is_one_to_one_with_positive_iou():
    rng = np.random.default_rng(0)
    for _ in range(300):
        gt = _random_segments(rng)
        pred = _random_segments(rng)
        matching = match_segments(gt, pred)
        gt_used = [gi for gi, _, _ in matching.pairs]
        pred_used = [pi for _, pi, _ in matching.pairs]
        assert len(set(gt_used)) == len(gt_used)
        assert len(set(pred_used)) == len(pred_used)
        assert all(iou > 0.0 for _, _, iou in matching.pairs)
        assert set(gt_used) | set(matching.unmatched_gt) == set(range(len(gt)))
        assert set(pred_used) | set(matching.unmatched_pred) == set(range(len(pred)))


def test_greedy_matching_near_optimal_over_trials():
    # greedy is not guaranteed optimal; require agreement with the
    # brute-force assignment on at least 95% of 1000 seeded trials
    rng = np.random.default_rng(42)
    agreements = 0
    trials = 1000
    worst_gap = 0.0
    for _ in range(trials):
        gt = _random_segments(rng)
        pred = _random_segments(rng)
        greedy_total = sum(iou for _, _, iou in match_segments(gt, pred).pairs)
        best_total = brute_force_best_total_iou(gt, pred)
        assert greedy_total <= best_total + 1e-12
        if abs(greedy_total - best_total) < 1e-9:
            agreements += 1
        else:
            worst_gap = max(worst_gap, best_total - greedy_total)
    print(f"greedy==optimal in {agreements}/{trials} trials, worst gap {worst_gap:.4f}")
    assert agreements >= 950


def test_segmentation_iou_examples():
    segs = [(0, 10), (20, 30)]
    assert segmentation_iou(segs, list(segs)) == 1.0
    assert segmentation_iou([(0, 10)], [(5, 15)]) == pytest.approx(1.0 / 3.0, abs=1e-12)
    # a missed repetition halves the score even if the match is perfect
    assert segmentation_iou([(0, 10), (20, 30)], [(0, 10)]) == 0.5
    assert segmentation_iou([], []) == 1.0
    assert segmentation_iou([(0, 5)], []) == 0.0
    assert segmentation_iou([], [(0, 5)]) == 0.0


def test_iou_bounded_and_spurious_prediction_never_helps():
    rng = np.random.default_rng(1)
    for _ in range(200):
        gt = _random_segments(rng)
        pred = _random_segments(rng)
        iou = segmentation_iou(gt, pred)
        assert 0.0 <= iou <= 1.0
        # a false positive far beyond everything overlaps no ground truth
        tail = max([e for _, e in gt + pred], default=0) + 10
        worse = segmentation_iou(gt, pred + [(tail, tail + 5)])
        assert worse <= iou + 1e-12


def test_mae_frames_identity_and_shift():
    segs = [(10, 30), (50, 80), (95, 120)]
    assert mae_frames(segs, list(segs)) == 0.0
    for k in (1, 4, 9):
        shifted = [(s + k, e + k) for s, e in segs]
        assert mae_frames(segs, shifted) == pytest.approx(float(k), abs=1e-12)


def test_mae_frames_recomputation_oracle():
    rng = np.random.default_rng(2)
    for _ in range(100):
        gt = []
        cursor = 0
        for _ in range(4):
            cursor += int(rng.integers(8, 15))
            length = int(rng.integers(12, 25))
            gt.append((cursor, cursor + length))
            cursor += length
        # small perturbations keep the identity matching
        pred = [
            (s + int(rng.integers(-3, 4)), e + int(rng.integers(-3, 4))) for s, e in gt
        ]
        expected = sum(
            (abs(p[0] - g[0]) + abs(p[1] - g[1])) / 2.0 for g, p in zip(gt, pred)
        ) / len(gt)
        assert mae_frames(gt, pred) == pytest.approx(expected, abs=1e-12)


def test_mae_frames_no_pairs():
    with pytest.raises(NoMatchedPairs):
        mae_frames([(0, 5)], [(20, 30)])
    with pytest.raises(NoMatchedPairs):
        mae_frames([(0, 5)], [])


def test_evaluate_sample_segment_head():
    gt = [(0, 10), (20, 30)]
    pred = [(1, 11), (20, 29)]
    row = evaluate_sample("s1", "squat", gt, 2, 2, pred)
    assert row.iou == pytest.approx(segmentation_iou(gt, pred))
    assert row.mae_f == pytest.approx(mae_frames(gt, pred))
    assert row.matched_pairs == 2
    assert (row.gt_segments, row.pred_segments) == (2, 2)


def test_evaluate_sample_count_head():
    row = evaluate_sample("s2", "squat", [(0, 10)], 1, 2, None)
    assert row.iou is None
    assert row.mae_f is None
    assert row.matched_pairs == 0
    assert row.pred_segments == 0


def test_evaluate_sample_no_overlap_flags_mae_f():
    row = evaluate_sample("s3", "squat", [(0, 10)], 1, 1, [(50, 60)])
    assert row.iou == 0.0
    assert row.mae_f is None  # excluded, not zero
    assert row.matched_pairs == 0


def _row(sid, ex, gt_count, pred_count, iou=0.8, mae_f=2.0, matched=2, gt_n=2, pred_n=2):
    return SampleMetrics(
        sample_id=sid,
        exercise_id=ex,
        gt_count=gt_count,
        pred_count=pred_count,
        iou=iou,
        mae_f=mae_f,
        matched_pairs=matched,
        gt_segments=gt_n,
        pred_segments=pred_n,
    )


def test_aggregate_single_sample_is_itself():
    row = _row("a", "x", 5, 4, iou=0.7, mae_f=3.0)
    rep = aggregate([row])
    assert rep.mae_abs == 1.0
    assert rep.mae_norm == pytest.approx(0.2)
    assert rep.obo == 1.0
    assert rep.iou == pytest.approx(0.7)
    assert rep.mae_f == pytest.approx(3.0)
    assert rep.mae_f_coverage == 1.0
    assert rep.n_samples == 1
    assert rep.grouping == "overall"


def test_aggregate_permutation_invariant():
    rng = np.random.default_rng(3)
    rows = [
        _row(f"s{i}", "ex", int(rng.integers(1, 9)), int(rng.integers(1, 9)),
             iou=float(rng.random()), mae_f=float(rng.random() * 10))
        for i in range(12)
    ]
    base = aggregate(rows)
    shuffled = list(rows)
    rng.shuffle(shuffled)
    moved = aggregate(shuffled)
    for field in ("mae_abs", "mae_norm", "obo", "iou", "mae_f", "mae_f_coverage"):
        assert getattr(moved, field) == pytest.approx(getattr(base, field), abs=1e-12), field
    assert moved.n_samples == base.n_samples


def test_aggregate_per_exercise_recombines_to_overall():
    rng = np.random.default_rng(4)
    rows = []
    for i in range(30):
        ex = ("a", "b", "c")[i % 3]
        rows.append(
            _row(f"s{i}", ex, int(rng.integers(1, 9)), int(rng.integers(1, 9)),
                 iou=float(rng.random()), mae_f=float(rng.random() * 10))
        )
    overall = aggregate(rows)
    groups = aggregate(rows, "per_exercise")
    assert set(groups) == {"a", "b", "c"}
    n = sum(g.n_samples for g in groups.values())
    assert n == overall.n_samples
    for field in ("mae_abs", "mae_norm", "obo", "iou", "mae_f"):
        weighted = sum(getattr(g, field) * g.n_samples for g in groups.values()) / n
        assert weighted == pytest.approx(getattr(overall, field), abs=1e-12), field


def test_aggregate_count_head_rows_have_no_segment_metrics():
    rows = [
        SampleMetrics("a", "x", 3, 3, None, None, 0, 3, 0),
        SampleMetrics("b", "x", 4, 5, None, None, 0, 4, 0),
    ]
    rep = aggregate(rows)
    assert rep.iou is None
    assert rep.mae_f is None
    assert rep.mae_f_coverage is None


def test_aggregate_coverage_counts_unmatched_segments():
    rows = [
        _row("a", "x", 2, 2, iou=1.0, mae_f=0.0, matched=2, gt_n=2, pred_n=2),
        # decoder produced a segment but it missed entirely
        SampleMetrics("b", "x", 1, 1, 0.0, None, 0, 1, 1),
    ]
    rep = aggregate(rows)
    assert rep.mae_f == pytest.approx(0.0)  # the unmatched sample is excluded
    assert rep.mae_f_coverage == pytest.approx(2.0 / 3.0)  # 2 of 3 possible pairs


def test_aggregate_errors():
    with pytest.raises(EmptyGroup):
        aggregate([])
    with pytest.raises(ValueError):
        aggregate([_row("a", "x", 1, 1)], grouping="per_subject")
