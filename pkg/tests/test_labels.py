"""Supervision targets: binary complements, density mass, peak placement."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from repseg.labels import (
    SIGMA_FRACTION_DEFAULT,
    binary_labels,
    count_label,
    density_map,
    make_bundle,
)
from repseg.skeleton_io import RepetitionAnnotation


def _ann(segments, length):
    return RepetitionAnnotation(segments=tuple(segments), sequence_length=length)


@st.composite
def annotations(draw, max_len=120, max_segments=6):
    """Random valid annotations: sorted non-overlapping half-open segments."""
    length = draw(st.integers(min_value=2, max_value=max_len))
    n = draw(st.integers(min_value=0, max_value=min(max_segments, (length + 1) // 2)))
    cuts = draw(
        st.lists(
            st.integers(min_value=0, max_value=length),
            min_size=2 * n,
            max_size=2 * n,
            unique=True,
        )
    )
    cuts.sort()
    segments = [(cuts[2 * i], cuts[2 * i + 1]) for i in range(n)]
    return _ann(segments, length)


def test_binary_example():
    assert binary_labels(_ann([(2, 5)], 7)).tolist() == [1, 1, 0, 0, 0, 1, 1]


def test_binary_no_segments_all_ones():
    assert binary_labels(_ann([], 4)).tolist() == [1, 1, 1, 1]


def test_binary_adjacent_segments_cover_everything():
    # back-to-back reps: frame 4 belongs to the second rep, not the boundary
    assert binary_labels(_ann([(0, 4), (4, 8)], 8)).tolist() == [0] * 8


def test_density_single_segment_mass_and_peak():
    d = density_map(_ann([(0, 11)], 11))
    assert abs(d.sum() - 1.0) < 1e-12
    assert d.argmax() == 5  # midpoint of frames 0..10
    assert np.all(d >= 0.0)


def test_density_two_segments_sum_to_two():
    d = density_map(_ann([(0, 10), (20, 30)], 40))
    assert abs(d.sum() - 2.0) < 1e-12
    assert np.all(d[10:20] == 0.0)
    assert np.all(d[30:] == 0.0)


def test_density_scalar_formula_oracle():
    # independent per-frame evaluation of the truncated-Gaussian definition
    start, end, length = 10, 40, 60
    frac = SIGMA_FRACTION_DEFAULT
    mu = (start + end - 1) / 2.0
    sigma = frac * (end - start)
    raw = [math.exp(-0.5 * ((t - mu) / sigma) ** 2) for t in range(start, end)]
    mass = sum(raw)
    expected = np.zeros(length)
    expected[start:end] = np.asarray(raw) / mass
    np.testing.assert_allclose(density_map(_ann([(start, end)], length)), expected, atol=1e-10)


def test_density_sigma_fraction_validation():
    with pytest.raises(ValueError):
        density_map(_ann([(0, 5)], 6), sigma_fraction=0.0)
    with pytest.raises(ValueError):
        density_map(_ann([(0, 5)], 6), sigma_fraction=-0.1)


def test_density_narrow_sigma_concentrates_mass():
    wide = density_map(_ann([(0, 30)], 30), sigma_fraction=0.5)
    narrow = density_map(_ann([(0, 30)], 30), sigma_fraction=0.05)
    assert narrow.max() > wide.max()
    assert abs(narrow.sum() - 1.0) < 1e-12


@settings(max_examples=200, deadline=None)
@given(annotations())
def test_density_sum_equals_count(ann):
    d = density_map(ann)
    assert abs(d.sum() - count_label(ann)) < 1e-6


@settings(max_examples=200, deadline=None)
@given(annotations())
def test_binary_density_supports_are_complementary(ann):
    b = binary_labels(ann)
    d = density_map(ann)
    assert np.all(d[b == 1.0] == 0.0)
    # every inside frame carries strictly positive density
    assert np.all(d[b == 0.0] > 0.0)


@settings(max_examples=100, deadline=None)
@given(annotations(max_len=60), st.integers(min_value=1, max_value=40))
def test_density_shift_equivariance(ann, k):
    shifted = _ann([(s + k, e + k) for s, e in ann.segments], ann.sequence_length + k)
    base = density_map(ann)
    moved = density_map(shifted)
    np.testing.assert_allclose(moved[k:], base, atol=1e-12)
    assert np.all(moved[:k] == 0.0)


@settings(max_examples=200, deadline=None)
@given(annotations())
def test_density_peaks_inside_their_segments(ann):
    d = density_map(ann)
    for s, e in ann.segments:
        peak = s + int(np.argmax(d[s:e]))
        assert s <= peak < e


def test_count_label():
    assert count_label(_ann([(0, 3), (5, 9)], 10)) == 2
    assert count_label(_ann([], 10)) == 0


def test_make_bundle_consistent():
    ann = _ann([(2, 8), (10, 18)], 20)
    bundle = make_bundle(ann)
    np.testing.assert_array_equal(bundle.binary, binary_labels(ann))
    np.testing.assert_array_equal(bundle.density, density_map(ann))
    assert bundle.count == 2
    assert bundle.binary.dtype == np.float64
    assert bundle.density.dtype == np.float64
