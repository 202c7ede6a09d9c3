import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from knight.errors import DimMismatch, DuplicateId, EmptyCorpus, KTooLarge
from knight.index import CaptionRecord, CorpusIndex, batch_top_k, build_index, top_k
from knight.vectors import normalize


def brute_force_top_k(records, query, k, exclude_id=None):
    """Independent oracle: score every record with a scalar fsum dot in
    float64, sort by (score desc, id asc), truncate."""
    q = [float(x) for x in np.asarray(query, dtype=np.float64)]
    scored = []
    for rec in records:
        if exclude_id is not None and rec.id == exclude_id:
            continue
        emb = [float(x) for x in rec.embedding.astype(np.float64)]
        s = math.fsum(a * b for a, b in zip(emb, q))
        s = min(1.0, max(-1.0, s))
        scored.append((rec.id, s))
    scored.sort(key=lambda t: (-t[1], t[0]))
    return scored[:k]


def make_records(n, dim, seed):
    rng = np.random.Generator(np.random.Philox(key=seed))
    return [
        CaptionRecord(id=i, text=f"caption {i}", embedding=normalize(rng.standard_normal(dim)))
        for i in range(n)
    ]


class TestBuildIndex:
    def test_sorted_by_id(self):
        recs = make_records(5, 4, 0)
        index = build_index(reversed(recs))
        assert [r.id for r in index] == [0, 1, 2, 3, 4]
        assert index.n == 5 and index.dim == 4

    def test_record_lookup(self):
        index = build_index(make_records(3, 4, 1))
        assert index.record(2).text == "caption 2"

    def test_empty(self):
        with pytest.raises(EmptyCorpus):
            build_index([])

    def test_duplicate_id(self):
        recs = make_records(2, 4, 2)
        dup = CaptionRecord(id=0, text="again", embedding=recs[0].embedding)
        with pytest.raises(DuplicateId):
            build_index(recs + [dup])

    def test_dim_mismatch(self):
        recs = make_records(2, 4, 3) + make_records(1, 5, 4)
        recs[2] = CaptionRecord(id=9, text="odd", embedding=recs[2].embedding)
        with pytest.raises(DimMismatch):
            build_index(recs)


class TestTopK:
    def test_self_match(self):
        recs = make_records(8, 6, 5)
        index = build_index(recs)
        hits = top_k(index, recs[5].embedding, 1)
        assert hits.ids == [5]
        assert hits.scores[0] == pytest.approx(1.0, abs=1e-6)

    def test_exclude_self_returns_second_nearest(self):
        recs = make_records(8, 6, 5)
        index = build_index(recs)
        oracle = brute_force_top_k(recs, recs[5].embedding, 1, exclude_id=5)
        hits = top_k(index, recs[5].embedding, 1, exclude_id=5)
        assert hits.ids[0] == oracle[0][0]
        assert 5 not in hits.ids

    def test_tie_breaks_by_ascending_id(self):
        v = normalize([1.0, 0.0])
        recs = [
            CaptionRecord(id=3, text="c", embedding=v),
            CaptionRecord(id=1, text="a", embedding=v),
            CaptionRecord(id=2, text="b", embedding=v.copy()),
        ]
        hits = top_k(build_index(recs), v, 2)
        assert hits.ids == [1, 2]

    def test_clamps_to_corpus_size(self):
        index = build_index(make_records(3, 4, 6))
        assert len(top_k(index, normalize([1, 0, 0, 0]), 10).ids) == 3

    def test_k_below_one(self):
        index = build_index(make_records(3, 4, 7))
        with pytest.raises(KTooLarge):
            top_k(index, normalize([1, 0, 0, 0]), 0)

    def test_query_dim_mismatch(self):
        index = build_index(make_records(3, 4, 8))
        with pytest.raises(DimMismatch):
            top_k(index, normalize([1, 0]), 1)

    def test_deterministic_repeat(self):
        recs = make_records(50, 8, 9)
        index = build_index(recs)
        q = normalize(np.random.Generator(np.random.Philox(key=99)).standard_normal(8))
        first = top_k(index, q, 7)
        second = top_k(index, q, 7)
        assert first.hits == second.hits

    @settings(max_examples=60, deadline=None)
    @given(
        st.integers(min_value=1, max_value=40),
        st.integers(min_value=2, max_value=16),
        st.integers(min_value=1, max_value=12),
        st.integers(min_value=0, max_value=2**31),
        st.booleans(),
    )
    def test_matches_brute_force(self, n, dim, k, seed, exclude):
        recs = make_records(n, dim, seed)
        index = build_index(recs)
        rng = np.random.Generator(np.random.Philox(key=seed + 1))
        q = normalize(rng.standard_normal(dim))
        exclude_id = (seed % n) if exclude else None
        oracle = brute_force_top_k(recs, q, k, exclude_id)
        hits = top_k(index, q, k, exclude_id=exclude_id)
        assert hits.ids == [i for i, _ in oracle]
        for got, (_, want) in zip(hits.scores, oracle):
            assert got == pytest.approx(want, abs=1e-12)


class TestBatchTopK:
    def test_matches_single_query_path_bitwise(self):
        recs = make_records(30, 8, 11)
        index = build_index(recs)
        rng = np.random.Generator(np.random.Philox(key=12))
        queries = [normalize(rng.standard_normal(8)) for _ in range(6)]
        batched = batch_top_k(index, queries, 4)
        for q, res in zip(queries, batched):
            assert res.hits == top_k(index, q, 4).hits

    def test_singleton(self):
        recs = make_records(5, 4, 13)
        index = build_index(recs)
        q = recs[2].embedding
        assert batch_top_k(index, [q], 2)[0].hits == top_k(index, q, 2).hits

    def test_empty_batch(self):
        index = build_index(make_records(5, 4, 14))
        assert batch_top_k(index, [], 2) == []
