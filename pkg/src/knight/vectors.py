"""Embedding vector primitives: normalization, cosine similarity, mean pooling.

Vectors are float32 arrays; dot products and means accumulate in float64
so results are deterministic across platforms, then round back to float32
where a vector is returned.
"""

from __future__ import annotations

import numpy as np

from .errors import DimMismatch, EmptyInput, ZeroVector

ZERO_NORM_THRESHOLD = 1e-12
UNIT_NORM_TOLERANCE = 1e-5


def as_vector(v) -> np.ndarray:
    """Coerce input to a 1-D float32 array, rejecting non-finite entries."""
    arr = np.asarray(v, dtype=np.float32)
    if arr.ndim != 1 or arr.size < 1:
        raise DimMismatch(f"expected a 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ZeroVector("vector contains non-finite components")
    return arr


def normalize(v) -> np.ndarray:
    """Scale v to unit Euclidean norm.

    Raises ZeroVector when |v| < 1e-12 (degenerate embedding input).
    """
    arr = as_vector(v)
    norm = float(np.sqrt(np.dot(arr.astype(np.float64), arr.astype(np.float64))))
    if norm < ZERO_NORM_THRESHOLD:
        raise ZeroVector(f"norm {norm} below threshold {ZERO_NORM_THRESHOLD}")
    return (arr.astype(np.float64) / norm).astype(np.float32)


def is_normalized(v, tol: float = UNIT_NORM_TOLERANCE) -> bool:
    arr = as_vector(v)
    norm = float(np.sqrt(np.dot(arr.astype(np.float64), arr.astype(np.float64))))
    return abs(norm - 1.0) <= tol


def cosine_similarity(a, b) -> float:
    """Dot product of two unit vectors, clamped to [-1, 1].

    Float round-off can push the raw dot slightly past the bounds; the
    clamp keeps downstream sorting honest.
    """
    va, vb = as_vector(a), as_vector(b)
    if va.shape[0] != vb.shape[0]:
        raise DimMismatch(f"dims {va.shape[0]} vs {vb.shape[0]}")
    dot = float(np.dot(va.astype(np.float64), vb.astype(np.float64)))
    return min(1.0, max(-1.0, dot))


def mean_pool(vs) -> np.ndarray:
    """Componentwise arithmetic mean of a nonempty list of same-dim vectors.

    The result is deliberately NOT renormalized; downstream projection
    consumes raw means.
    """
    vectors = [as_vector(v) for v in vs]
    if not vectors:
        raise EmptyInput("mean_pool requires at least one vector")
    dim = vectors[0].shape[0]
    for v in vectors[1:]:
        if v.shape[0] != dim:
            raise DimMismatch(f"dims {dim} vs {v.shape[0]}")
    acc = np.zeros(dim, dtype=np.float64)
    for v in vectors:
        acc += v.astype(np.float64)
    return (acc / len(vectors)).astype(np.float32)
