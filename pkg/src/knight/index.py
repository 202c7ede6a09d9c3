"""Immutable corpus index with exact, deterministic top-k cosine retrieval.

Records store unit-norm float32 embeddings; queries score against a
float64 copy of the embedding matrix so repeated queries are bit-stable.
Ties on score break by ascending record id. Retrieval is exact: a flat
scan with partial selection, never approximate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimMismatch, DuplicateId, EmptyCorpus, KTooLarge
from .vectors import as_vector


@dataclass(frozen=True)
class CaptionRecord:
    id: int
    text: str
    embedding: np.ndarray  # unit-norm float32

    def __post_init__(self):
        if self.id < 0:
            raise DuplicateId(f"record ids must be non-negative, got {self.id}")
        if not self.text.strip():
            raise EmptyCorpus(f"record {self.id} has empty text")


@dataclass(frozen=True)
class RetrievalResult:
    """Hits ordered by (score desc, id asc)."""

    hits: tuple[tuple[int, float], ...]

    @property
    def ids(self) -> list[int]:
        return [i for i, _ in self.hits]

    @property
    def scores(self) -> list[float]:
        return [s for _, s in self.hits]


@dataclass(frozen=True)
class CorpusIndex:
    records: tuple[CaptionRecord, ...]
    dim: int
    # float64 scoring matrix, row i belongs to records[i]
    _matrix: np.ndarray = field(repr=False)
    _ids: np.ndarray = field(repr=False)
    _pos_by_id: dict[int, int] = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.records)

    def record(self, record_id: int) -> CaptionRecord:
        return self.records[self._pos_by_id[record_id]]

    def __iter__(self):
        return iter(self.records)


def build_index(records) -> CorpusIndex:
    """Validate, sort by id, and freeze the corpus into an index."""
    records = list(records)
    if not records:
        raise EmptyCorpus("cannot index an empty corpus")
    seen: set[int] = set()
    dim = records[0].embedding.shape[0]
    for rec in records:
        if rec.id in seen:
            raise DuplicateId(f"duplicate record id {rec.id}")
        seen.add(rec.id)
        if rec.embedding.shape[0] != dim:
            raise DimMismatch(
                f"record {rec.id} has dim {rec.embedding.shape[0]}, expected {dim}"
            )
    ordered = tuple(sorted(records, key=lambda r: r.id))
    matrix = np.stack([r.embedding for r in ordered]).astype(np.float64)
    ids = np.array([r.id for r in ordered], dtype=np.int64)
    pos = {r.id: i for i, r in enumerate(ordered)}
    return CorpusIndex(records=ordered, dim=dim, _matrix=matrix, _ids=ids, _pos_by_id=pos)


def _clamp(scores: np.ndarray) -> np.ndarray:
    return np.clip(scores, -1.0, 1.0)


def _select_top(scores: np.ndarray, k: int, exclude_pos: int | None) -> np.ndarray:
    """Row positions of the k best scores, ties by ascending position.

    Partial selection: partition down to the candidate set, then stable-sort
    only the candidates, keeping every row tied with the k-th score so the
    id tie-break is applied before truncation.
    """
    n = scores.shape[0]
    take = k if exclude_pos is None else k + 1
    if take >= n:
        order = np.argsort(-scores, kind="stable")
    else:
        part = np.argpartition(-scores, take - 1)[:take]
        threshold = scores[part].min()
        candidates = np.flatnonzero(scores >= threshold)
        candidates = candidates[np.argsort(-scores[candidates], kind="stable")]
        order = candidates
    if exclude_pos is not None:
        order = order[order != exclude_pos]
    return order[:k]


def top_k(
    index: CorpusIndex,
    query,
    k: int,
    exclude_id: int | None = None,
) -> RetrievalResult:
    """Exact k highest-similarity records for a unit-norm query.

    Returns fewer than k hits only when the corpus (minus the exclusion)
    is smaller than k. exclude_id drops a training caption's self-match.
    """
    if k < 1:
        raise KTooLarge(f"k must be >= 1, got {k}")
    q = as_vector(query)
    if q.shape[0] != index.dim:
        raise DimMismatch(f"query dim {q.shape[0]} vs index dim {index.dim}")
    scores = _clamp(index._matrix @ q.astype(np.float64))
    exclude_pos = index._pos_by_id.get(exclude_id) if exclude_id is not None else None
    order = _select_top(scores, k, exclude_pos)
    hits = tuple((int(index._ids[i]), float(scores[i])) for i in order)
    return RetrievalResult(hits=hits)


def batch_top_k(index: CorpusIndex, queries, k: int) -> list[RetrievalResult]:
    """Per-query top_k with input order preserved.

    Runs each query through the single-query path so results are
    bit-identical to individual top_k calls; queries are independent and
    could fan out across workers as long as output order is kept.
    """
    return [top_k(index, q, k) for q in queries]
