"""Skeleton/annotation parsing, serialization round trips, normalization."""

import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from repseg.errors import (
    DegenerateScale,
    EmptySequence,
    InconsistentJointCount,
    MalformedHeader,
    MalformedRow,
    OutOfRangeSegment,
    OverlappingSegments,
)
from repseg.skeleton_io import (
    NormalizationSpec,
    RepetitionAnnotation,
    SkeletonSequence,
    normalize,
    parse_annotation,
    parse_skeleton,
    serialize_annotation,
    serialize_skeleton,
    skeleton_meta,
)


def _seq(frames, **kw):
    return SkeletonSequence(frames=np.asarray(frames, dtype=np.float64), **kw)


def _random_seq(rng, n_frames=5, n_joints=4):
    return _seq(rng.normal(size=(n_frames, n_joints, 3)))


CSV_2J = "frame,a_x,a_y,a_z,b_x,b_y,b_z\n0,0,1,2,3,4,5\n1,6,7,8,9,10,11\n"


def test_parse_skeleton_basic():
    seq = parse_skeleton(CSV_2J)
    assert seq.n_frames == 2
    assert seq.n_joints == 2
    assert seq.joint_names == ("a", "b")
    assert seq.frames[1, 1].tolist() == [9.0, 10.0, 11.0]
    # defaults without a sidecar
    assert seq.frame_rate == 30.0
    assert seq.population_tag == "unknown"


def test_parse_skeleton_meta():
    meta = {
        "frame_rate": 25.0,
        "subject": "s01",
        "exercise": "arm_raise",
        "dataset": "clinic",
        "population": "patient",
    }
    seq = parse_skeleton(io.StringIO(CSV_2J), meta=meta)
    assert seq.frame_rate == 25.0
    assert seq.subject_id == "s01"
    assert seq.exercise_id == "arm_raise"
    assert seq.dataset_id == "clinic"
    assert seq.population_tag == "patient"
    assert skeleton_meta(seq) == meta


def test_serialize_parse_round_trip_exact():
    rng = np.random.default_rng(0)
    seq = _random_seq(rng, n_frames=7, n_joints=5)
    back = parse_skeleton(serialize_skeleton(seq))
    np.testing.assert_array_equal(back.frames, seq.frames)
    assert back.joint_names == seq.joint_names


@settings(max_examples=50, deadline=None)
@given(
    st.lists(
        st.floats(
            allow_nan=False,
            allow_infinity=False,
            min_value=-1e12,
            max_value=1e12,
        ),
        min_size=12,
        max_size=12,
    )
)
def test_round_trip_survives_extreme_floats(values):
    frames = np.asarray(values, dtype=np.float64).reshape(2, 2, 3)
    seq = _seq(frames)
    back = parse_skeleton(serialize_skeleton(seq))
    np.testing.assert_array_equal(back.frames, seq.frames)


@pytest.mark.parametrize(
    "header",
    [
        "time,a_x,a_y,a_z",  # first column must be frame
        "frame,a_x,a_y",  # broken triplet
        "frame,a_x,a_z,a_y",  # wrong coordinate order
        "frame,a_x,b_y,a_z",  # mixed joint names in one triplet
        "frame",  # no joints at all
    ],
)
def test_malformed_headers(header):
    with pytest.raises(MalformedHeader):
        parse_skeleton(header + "\n0,0,0,0\n1,1,1,1\n")


def test_malformed_rows():
    with pytest.raises(MalformedRow):
        parse_skeleton("frame,a_x,a_y,a_z\n0,0,oops,0\n1,1,1,1\n")
    with pytest.raises(MalformedRow):
        parse_skeleton("frame,a_x,a_y,a_z\n0,0,nan,0\n1,1,1,1\n")
    with pytest.raises(InconsistentJointCount):
        parse_skeleton("frame,a_x,a_y,a_z\n0,0,0,0,9\n1,1,1,1\n")


def test_too_short_sequences():
    with pytest.raises(EmptySequence):
        parse_skeleton("")
    with pytest.raises(EmptySequence):
        parse_skeleton("frame,a_x,a_y,a_z\n")
    with pytest.raises(EmptySequence):
        parse_skeleton("frame,a_x,a_y,a_z\n0,0,0,0\n")


def test_sequence_validation():
    with pytest.raises(MalformedRow):
        _seq(np.full((3, 2, 3), np.nan))
    with pytest.raises(MalformedRow):
        _seq(np.zeros((3, 2, 2)))
    with pytest.raises(MalformedRow):
        _seq(np.zeros((3, 2, 3)), population_tag="other")
    with pytest.raises(InconsistentJointCount):
        _seq(np.zeros((3, 2, 3)), joint_names=("a", "b", "c"))
    seq = _seq(np.zeros((3, 2, 3)))
    with pytest.raises(ValueError):
        seq.frames[0, 0, 0] = 1.0  # frames are read-only


def test_annotation_sorting_and_count():
    ann = RepetitionAnnotation(segments=((8, 10), (2, 5)), sequence_length=12)
    assert ann.segments == ((2, 5), (8, 10))
    assert ann.count() == 2
    assert RepetitionAnnotation(segments=(), sequence_length=5).count() == 0


def test_annotation_edge_touching_segments_are_legal():
    ann = RepetitionAnnotation(segments=((0, 4), (4, 10)), sequence_length=10)
    assert ann.count() == 2


def test_annotation_validation():
    with pytest.raises(OutOfRangeSegment):
        RepetitionAnnotation(segments=((0, 11),), sequence_length=10)
    with pytest.raises(OutOfRangeSegment):
        RepetitionAnnotation(segments=((-1, 3),), sequence_length=10)
    with pytest.raises(OutOfRangeSegment):
        RepetitionAnnotation(segments=((4, 4),), sequence_length=10)
    with pytest.raises(OverlappingSegments):
        RepetitionAnnotation(segments=((0, 5), (4, 8)), sequence_length=10)


def test_annotation_json_round_trip():
    ann = RepetitionAnnotation(segments=((2, 5), (7, 9)), sequence_length=12)
    text = serialize_annotation(ann, exercise="squat", subject="s03")
    back = parse_annotation(text)
    assert back == ann
    # unsorted segments on disk are accepted
    shuffled = '{"length": 12, "segments": [[7, 9], [2, 5]]}'
    assert parse_annotation(shuffled) == ann


def test_annotation_parse_errors():
    with pytest.raises(MalformedRow):
        parse_annotation("{not json")
    with pytest.raises(MalformedRow):
        parse_annotation('{"segments": [[0, 2]]}')  # missing length
    with pytest.raises(MalformedRow):
        parse_annotation('{"length": 5, "segments": [["a", 2]]}')


def test_normalize_centers_root_and_fixes_scale():
    rng = np.random.default_rng(1)
    seq = _random_seq(rng, n_frames=6, n_joints=4)
    spec = NormalizationSpec(root_joint_index=0, scale_pair=(1, 2))
    out = normalize(seq, spec)
    np.testing.assert_allclose(out.frames[:, 0, :], 0.0, atol=1e-12)
    dists = np.linalg.norm(out.frames[:, 1, :] - out.frames[:, 2, :], axis=1)
    assert abs(dists.mean() - 1.0) < 1e-12


def test_normalize_disabled_is_identity():
    rng = np.random.default_rng(2)
    seq = _random_seq(rng)
    out = normalize(seq, NormalizationSpec(enabled=False))
    assert out is seq


def test_normalize_idempotent():
    rng = np.random.default_rng(3)
    seq = _random_seq(rng)
    spec = NormalizationSpec(root_joint_index=0, scale_pair=(1, 3))
    once = normalize(seq, spec)
    twice = normalize(once, spec)
    np.testing.assert_allclose(twice.frames, once.frames, atol=1e-9)


@settings(max_examples=25, deadline=None)
@given(
    scale=st.floats(min_value=1e-3, max_value=1e3),
    shift=st.tuples(
        st.floats(min_value=-100, max_value=100),
        st.floats(min_value=-100, max_value=100),
        st.floats(min_value=-100, max_value=100),
    ),
    seed=st.integers(min_value=0, max_value=2**16),
)
def test_normalize_invariant_to_scale_and_translation(scale, shift, seed):
    rng = np.random.default_rng(seed)
    seq = _random_seq(rng)
    spec = NormalizationSpec(root_joint_index=0, scale_pair=(1, 2))
    moved = _seq(seq.frames * scale + np.asarray(shift))
    np.testing.assert_allclose(
        normalize(moved, spec).frames, normalize(seq, spec).frames, atol=1e-9
    )


def test_normalize_errors():
    rng = np.random.default_rng(4)
    seq = _random_seq(rng, n_joints=3)
    with pytest.raises(OutOfRangeSegment):
        normalize(seq, NormalizationSpec(root_joint_index=0, scale_pair=(0, 20)))
    with pytest.raises(DegenerateScale):
        NormalizationSpec(scale_pair=(1, 1))
    collapsed = _seq(np.zeros((3, 2, 3)))
    with pytest.raises(DegenerateScale):
        normalize(collapsed, NormalizationSpec(root_joint_index=0, scale_pair=(0, 1)))
