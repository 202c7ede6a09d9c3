"""Synthetic dual-encoder stand-in with an explicit modality gap.

Text embeddings are bag-of-hashed-tokens sums: every token deterministically
owns a Gaussian direction, so captions sharing words land near each other.
Image surrogates are text embeddings pushed along one fixed gap direction
(the systematic image/text subspace offset) plus per-sample noise.

All randomness flows through Philox keyed by blake2b digests of
domain-tagged inputs: counter-based, splittable, identical on every
platform.
"""

from __future__ import annotations

import hashlib
import re
import struct
from dataclasses import dataclass

import numpy as np

from .errors import EmptyCaption
from .vectors import normalize

_WORD_RE = re.compile(r"[a-z0-9]+")

_MASK64 = 0xFFFFFFFFFFFFFFFF


@dataclass(frozen=True)
class SynthEmbedConfig:
    dim: int = 64
    token_seed: int = 0
    gap_seed: int = 0
    gap_magnitude: float = 1.0
    noise_sigma: float = 0.05

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError(f"dim must be >= 2, got {self.dim}")
        if not np.isfinite(self.gap_magnitude) or self.gap_magnitude < 0:
            raise ValueError(f"gap_magnitude must be finite and >= 0, got {self.gap_magnitude}")
        if not np.isfinite(self.noise_sigma) or self.noise_sigma < 0:
            raise ValueError(f"noise_sigma must be finite and >= 0, got {self.noise_sigma}")


def _hash64(domain: str, payload: str, seed: int) -> int:
    """Stable 64-bit key for (domain, payload, seed); blake2b so results
    never depend on PYTHONHASHSEED or platform."""
    h = hashlib.blake2b(digest_size=8)
    h.update(domain.encode("utf-8"))
    h.update(b"\x00")
    h.update(payload.encode("utf-8"))
    h.update(b"\x00")
    h.update(struct.pack("<Q", seed & _MASK64))
    return int.from_bytes(h.digest(), "little")


def _gaussian(key: int, dim: int) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(key=key))
    return rng.standard_normal(dim, dtype=np.float64)


def _split_words(caption: str) -> list[str]:
    # Unlike the vocabulary tokenizer, punctuation is a separator here, not
    # a token: it carries no lexical-overlap signal worth an embedding axis.
    return _WORD_RE.findall(caption.lower())


def embed_text_synthetic(caption: str, cfg: SynthEmbedConfig) -> np.ndarray:
    """Normalized sum of per-token Gaussian vectors (bag of tokens)."""
    if not caption or not caption.strip():
        raise EmptyCaption("caption is empty")
    words = _split_words(caption)
    if not words:
        raise EmptyCaption(f"caption has no embeddable tokens: {caption!r}")
    total = np.zeros(cfg.dim, dtype=np.float64)
    for word in words:
        total += _gaussian(_hash64("token", word, cfg.token_seed), cfg.dim)
    return normalize(total)


def derive_gap_vector(cfg: SynthEmbedConfig) -> np.ndarray:
    """Fixed modality-gap offset: one unit direction per gap_seed, scaled
    by gap_magnitude. Zero magnitude yields the zero vector."""
    raw = _gaussian(_hash64("gap", "", cfg.gap_seed), cfg.dim)
    unit = raw / np.linalg.norm(raw)
    return (cfg.gap_magnitude * unit).astype(np.float32)


def embed_image_surrogate(
    paired_caption: str, sample_seed: int, cfg: SynthEmbedConfig
) -> np.ndarray:
    """Synthetic image embedding for a scene described by paired_caption.

    normalize(text_embedding + gap_vector + sigma * noise(sample_seed)).
    """
    text = embed_text_synthetic(paired_caption, cfg)
    noise = _gaussian(_hash64("noise", "", sample_seed), cfg.dim)
    delta = derive_gap_vector(cfg).astype(np.float64) + cfg.noise_sigma * noise
    if not delta.any():
        # Degenerate gap: renormalizing an already-unit vector could flip
        # final bits, and the zero-perturbation case must match exactly.
        return text
    return normalize(text.astype(np.float64) + delta)
