from __future__ import annotations

import numpy as np
import pytest

from occulstm.errors import DataError, NonFiniteInput
from occulstm.nn.encoding import clamp_count, clamp_counts, decode_argmax, decode_batch, one_hot_batch, one_hot_encode

# Softmax output of a trained classifier for one window; the largest entry sits at index 12
PUBLISHED_PROBS = np.array([
    3.1594791e-02, 1.1173296e-03, 1.9875835e-01,
    1.2148099e-01, 1.7412059e-01, 9.9778280e-04,
    7.6386752e-04, 3.7641544e-02, 1.0577185e-03,
    4.6020711e-04, 8.2410325e-04, 7.5649790e-04,
    4.2702064e-01, 2.0497683e-03, 9.2915818e-04,
    4.2664449e-04,
])  # fmt: skip


@pytest.mark.parametrize(("people", "label"), [(0, 0), (13, 13), (15, 15), (16, 15), (23, 15)])
def test_clamp_count(people, label):
    assert clamp_count(people) == label


def test_clamp_is_idempotent_and_monotone():
    counts = np.arange(0, 60)
    clamped = clamp_counts(counts)
    np.testing.assert_array_equal(clamp_counts(clamped), clamped)
    assert np.all(np.diff(clamped) >= 0)


def test_clamp_rejects_negative():
    with pytest.raises(DataError):
        clamp_count(-1)
    with pytest.raises(DataError):
        clamp_counts(np.array([3, -2]))


def test_one_hot_positions():
    np.testing.assert_array_equal(one_hot_encode(0), [1.0] + [0.0] * 15)
    np.testing.assert_array_equal(one_hot_encode(15), [0.0] * 15 + [1.0])
    bits = one_hot_encode(3)
    assert bits.sum() == 1.0
    assert bits[3] == 1.0


def test_one_hot_out_of_range():
    with pytest.raises(DataError):
        one_hot_encode(16)


def test_decode_inverts_encode_for_every_class():
    for k in range(16):
        assert decode_argmax(one_hot_encode(k)) == k
    np.testing.assert_array_equal(decode_batch(one_hot_batch(np.arange(16))), np.arange(16))


def test_decode_published_probabilities():
    assert decode_argmax(PUBLISHED_PROBS) == 12


def test_decode_ties_go_to_lowest_index():
    assert decode_argmax(np.full(16, 1 / 16)) == 0
    probs = np.zeros(16)
    probs[[4, 9]] = 0.5
    assert decode_argmax(probs) == 4


def test_decode_rejects_non_finite():
    probs = np.full(16, 1 / 16)
    probs[5] = np.nan
    with pytest.raises(NonFiniteInput):
        decode_argmax(probs)
    with pytest.raises(NonFiniteInput):
        decode_batch(probs[np.newaxis])


def test_decode_rejects_wrong_length():
    with pytest.raises(DataError):
        decode_argmax(np.ones(15))
