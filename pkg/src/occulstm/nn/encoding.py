"""Occupancy counts as capped class labels, one-hot vectors, and argmax decoding."""

from __future__ import annotations

import numpy as np

from occulstm.errors import DataError, NonFiniteInput

# Counts above the cap share the top class; 16 classes cover 0..15
MAX_COUNT = 15
NUM_CLASSES = MAX_COUNT + 1


def clamp_count(people: int) -> int:
    """Map a head count to its class label, ``min(people, 15)``."""
    if people < 0:
        raise DataError(f"people count must be non-negative, got {people}")
    return min(int(people), MAX_COUNT)


def clamp_counts(people: np.ndarray) -> np.ndarray:
    """Vectorized :func:`clamp_count`."""
    people = np.asarray(people)
    if np.any(people < 0):
        raise DataError("people counts must be non-negative")
    return np.minimum(people, MAX_COUNT).astype(np.int64)


def one_hot_encode(label: int) -> np.ndarray:
    """16-element vector with a single 1 at the zero-based index ``label``."""
    if not 0 <= label <= MAX_COUNT:
        raise DataError(f"class label must be in [0, {MAX_COUNT}], got {label}")
    bits = np.zeros(NUM_CLASSES)
    bits[label] = 1.0
    return bits


def one_hot_batch(labels: np.ndarray) -> np.ndarray:
    """One-hot rows for a vector of class labels."""
    return np.eye(NUM_CLASSES)[np.asarray(labels, dtype=np.int64)]


def decode_argmax(probs: np.ndarray) -> int:
    """Index of the largest probability; ties go to the lowest index."""
    probs = np.asarray(probs, dtype=np.float64)
    if probs.shape != (NUM_CLASSES,):
        raise DataError(f"expected {NUM_CLASSES} probabilities, got shape {probs.shape}")
    if not np.all(np.isfinite(probs)):
        raise NonFiniteInput("probability vector contains NaN or infinity")
    return int(np.argmax(probs))


def decode_batch(probs: np.ndarray) -> np.ndarray:
    """Row-wise :func:`decode_argmax` over a ``[n, 16]`` array."""
    probs = np.asarray(probs, dtype=np.float64)
    if not np.all(np.isfinite(probs)):
        raise NonFiniteInput("probability matrix contains NaN or infinity")
    return np.argmax(probs, axis=-1).astype(np.int64)
