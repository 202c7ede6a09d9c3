"""Synthetic embedder: determinism, bag-of-tokens geometry, gap construction."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from knight.errors import EmptyCaption
from knight.synth import (
    SynthEmbedConfig,
    derive_gap_vector,
    embed_image_surrogate,
    embed_text_synthetic,
)
from knight.vectors import cosine_similarity

WORDS = ["red", "dog", "runs", "blue", "cat", "sits", "over", "hill", "a", "the"]


def scalar_norm(v) -> float:
    return math.sqrt(math.fsum(float(x) * float(x) for x in v))


class TestConfig:
    def test_defaults(self):
        cfg = SynthEmbedConfig()
        assert cfg.dim == 64
        assert cfg.gap_magnitude == 1.0
        assert cfg.noise_sigma == 0.05

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"dim": 1},
            {"dim": 0},
            {"gap_magnitude": -0.1},
            {"gap_magnitude": float("nan")},
            {"gap_magnitude": float("inf")},
            {"noise_sigma": -1.0},
            {"noise_sigma": float("nan")},
        ],
    )
    def test_rejects_bad_fields(self, kwargs):
        with pytest.raises(ValueError):
            SynthEmbedConfig(**kwargs)


class TestTextEmbedding:
    def test_deterministic(self):
        cfg = SynthEmbedConfig(dim=16, token_seed=3)
        a = embed_text_synthetic("a red dog runs", cfg)
        b = embed_text_synthetic("a red dog runs", cfg)
        assert np.array_equal(a, b)

    def test_unit_norm(self):
        cfg = SynthEmbedConfig(dim=32, token_seed=0)
        v = embed_text_synthetic("the quick brown fox", cfg)
        assert abs(scalar_norm(v) - 1.0) < 1e-5

    def test_adjacent_transposition_is_bit_identical(self):
        # swapping two neighbors only commutes one addition, which IEEE
        # arithmetic performs exactly
        cfg = SynthEmbedConfig(dim=16, token_seed=9)
        assert np.array_equal(
            embed_text_synthetic("a red dog", cfg),
            embed_text_synthetic("red a dog", cfg),
        )

    @given(
        words=st.lists(st.sampled_from(WORDS), min_size=1, max_size=6),
        perm_seed=st.integers(min_value=0, max_value=2**16),
        token_seed=st.integers(min_value=0, max_value=2**32),
    )
    @settings(max_examples=40, deadline=None)
    def test_token_order_irrelevant(self, words, perm_seed, token_seed):
        # arbitrary reorderings reassociate the sum, so allow rounding slack
        cfg = SynthEmbedConfig(dim=12, token_seed=token_seed)
        rng = np.random.Generator(np.random.Philox(key=perm_seed))
        shuffled = [words[i] for i in rng.permutation(len(words))]
        a = embed_text_synthetic(" ".join(words), cfg)
        b = embed_text_synthetic(" ".join(shuffled), cfg)
        assert np.allclose(a, b, rtol=0, atol=1e-6)

    def test_case_and_punctuation_ignored(self):
        cfg = SynthEmbedConfig(dim=16, token_seed=1)
        assert np.array_equal(
            embed_text_synthetic("A Red Dog.", cfg),
            embed_text_synthetic("a red dog", cfg),
        )

    @pytest.mark.parametrize("caption", ["", "   ", "!!! ...", "\t\n"])
    def test_empty_captions_rejected(self, caption):
        with pytest.raises(EmptyCaption):
            embed_text_synthetic(caption, SynthEmbedConfig(dim=8))

    def test_lexical_overlap_raises_similarity(self):
        # shared-token captions should usually sit closer than disjoint ones
        hits = 0
        for seed in range(100):
            cfg = SynthEmbedConfig(dim=64, token_seed=seed)
            anchor = embed_text_synthetic("a red dog runs", cfg)
            near = embed_text_synthetic("a red dog sits", cfg)
            far = embed_text_synthetic("blue airplane over ocean", cfg)
            if cosine_similarity(anchor, near) > cosine_similarity(anchor, far):
                hits += 1
        assert hits >= 95


class TestGapVector:
    def test_zero_magnitude_is_zero_vector(self):
        cfg = SynthEmbedConfig(dim=16, gap_seed=5, gap_magnitude=0.0)
        assert not derive_gap_vector(cfg).any()

    def test_deterministic(self):
        cfg = SynthEmbedConfig(dim=16, gap_seed=5)
        assert np.array_equal(derive_gap_vector(cfg), derive_gap_vector(cfg))

    def test_unit_norm_at_gamma_one(self):
        cfg = SynthEmbedConfig(dim=64, gap_seed=11, gap_magnitude=1.0)
        assert abs(scalar_norm(derive_gap_vector(cfg)) - 1.0) < 1e-6

    @given(
        gap_seed=st.integers(min_value=0, max_value=2**32),
        gamma=st.floats(min_value=0.01, max_value=8.0, allow_nan=False),
    )
    @settings(max_examples=40, deadline=None)
    def test_norm_equals_magnitude(self, gap_seed, gamma):
        cfg = SynthEmbedConfig(dim=24, gap_seed=gap_seed, gap_magnitude=gamma)
        assert abs(scalar_norm(derive_gap_vector(cfg)) - gamma) < 1e-5 * max(1.0, gamma)


class TestImageSurrogate:
    def test_degenerate_gap_matches_text_exactly(self):
        cfg = SynthEmbedConfig(dim=32, token_seed=4, gap_magnitude=0.0, noise_sigma=0.0)
        text = embed_text_synthetic("a red dog runs", cfg)
        img = embed_image_surrogate("a red dog runs", sample_seed=77, cfg=cfg)
        assert np.array_equal(text, img)

    def test_gap_displaces_but_preserves_pairing(self):
        # with the gap on, the surrogate drifts off its caption yet stays
        # closer to it than to unrelated text
        hits = 0
        for seed in range(100):
            cfg = SynthEmbedConfig(
                dim=64, token_seed=seed, gap_seed=seed + 1000,
                gap_magnitude=1.0, noise_sigma=0.0,
            )
            own = embed_text_synthetic("a red dog runs", cfg)
            other = embed_text_synthetic("blue airplane over ocean", cfg)
            img = embed_image_surrogate("a red dog runs", sample_seed=0, cfg=cfg)
            c_own = cosine_similarity(img, own)
            if c_own < 1.0 and c_own > cosine_similarity(img, other):
                hits += 1
        assert hits >= 95

    def test_sample_seeds_give_distinct_vectors(self):
        cfg = SynthEmbedConfig(dim=32, token_seed=2, gap_seed=3, noise_sigma=0.05)
        a = embed_image_surrogate("a red dog", 0, cfg)
        b = embed_image_surrogate("a red dog", 1, cfg)
        assert not np.array_equal(a, b)

    def test_same_sample_seed_is_deterministic(self):
        cfg = SynthEmbedConfig(dim=32, token_seed=2, gap_seed=3)
        a = embed_image_surrogate("a red dog", 42, cfg)
        b = embed_image_surrogate("a red dog", 42, cfg)
        assert np.array_equal(a, b)

    @given(
        words=st.lists(st.sampled_from(WORDS), min_size=1, max_size=5),
        sample_seed=st.integers(min_value=0, max_value=2**32),
        gamma=st.floats(min_value=0.0, max_value=4.0, allow_nan=False),
    )
    @settings(max_examples=40, deadline=None)
    def test_always_unit_norm(self, words, sample_seed, gamma):
        cfg = SynthEmbedConfig(dim=16, token_seed=8, gap_seed=9, gap_magnitude=gamma)
        v = embed_image_surrogate(" ".join(words), sample_seed, cfg)
        assert abs(scalar_norm(v) - 1.0) < 1e-5

    def test_empty_caption_rejected(self):
        with pytest.raises(EmptyCaption):
            embed_image_surrogate("  ", 0, SynthEmbedConfig(dim=8))
