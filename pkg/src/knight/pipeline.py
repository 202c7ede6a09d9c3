"""Inference: neighbor-prefix construction for images and videos, caption
generation, and the bundled model artifact (decoder + projector + vocab).

Image queries condition on their k nearest corpus-caption embeddings,
unpooled, in descending-similarity order. Video queries sample keyframes
isometrically, retrieve k neighbors per keyframe, and condition on the
per-keyframe means in frame order. The per-frame means are deliberately
not renormalized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .decoder import (
    DecoderParams,
    PrefixBundle,
    beam_search,
    load_model,
    make_prefix,
    save_model,
)
from .errors import DimMismatch, EmptyInput, KTooLarge
from .index import CorpusIndex, top_k
from .projector import MlpParams
from .tokenizer import Vocabulary, build_vocabulary
from .training import TrainingConfig, train
from .vectors import mean_pool


@dataclass(frozen=True)
class FrameSequence:
    """Per-frame embeddings of one video, in time order."""

    embeddings: np.ndarray  # (N, dim)

    def __post_init__(self):
        emb = np.asarray(self.embeddings, dtype=np.float32)
        if emb.ndim != 2:
            raise DimMismatch(f"frame array must be 2-D, got shape {emb.shape}")
        if emb.shape[0] < 1:
            raise EmptyInput("a video needs at least one frame")
        object.__setattr__(self, "embeddings", emb)

    def __len__(self) -> int:
        return self.embeddings.shape[0]


@dataclass
class CaptionModel:
    decoder: DecoderParams
    projector: MlpParams
    vocab: Vocabulary


def build_prefix_from_query(
    index: CorpusIndex, query: np.ndarray, k: int, mlp: MlpParams
) -> PrefixBundle:
    """Top-k corpus embeddings for the query (no exclusion), most similar
    first, projected into decoder space."""
    if k > index.n:
        raise KTooLarge(f"k={k} exceeds corpus size {index.n}")
    hits = top_k(index, query, k)
    raw = np.stack([index.record(i).embedding for i in hits.ids])
    return make_prefix(raw, mlp)


def sample_keyframes(frames: FrameSequence, m: int) -> FrameSequence:
    """Isometric sampling: indices floor(j*N/m) for j in 0..m-1,
    de-duplicated in order when the video is shorter than m."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    n = len(frames)
    indices = []
    for j in range(m):
        idx = (j * n) // m
        if not indices or indices[-1] != idx:
            indices.append(idx)
    return FrameSequence(frames.embeddings[indices])


def build_video_prefix(
    index: CorpusIndex, frames: FrameSequence, m: int, k: int, mlp: MlpParams
) -> PrefixBundle:
    """Per sampled keyframe: retrieve top-k, mean-pool; one prefix entry
    per keyframe, in frame order."""
    if k > index.n:
        raise KTooLarge(f"k={k} exceeds corpus size {index.n}")
    keyframes = sample_keyframes(frames, m)
    pooled = []
    for frame in keyframes.embeddings:
        hits = top_k(index, frame, k)
        pooled.append(mean_pool([index.record(i).embedding for i in hits.ids]))
    return make_prefix(np.stack(pooled), mlp)


def infer_caption(
    model: CaptionModel, prefix: PrefixBundle, beam_width: int = 5, alpha: float = 0.0
) -> str:
    ids = beam_search(model.decoder, model.projector, prefix, width=beam_width, alpha=alpha)
    return model.vocab.decode(ids)


def fit_caption_model(
    corpus: CorpusIndex, config: TrainingConfig
) -> tuple[CaptionModel, list[float]]:
    """Train and bundle with the (deterministically rebuilt) vocabulary."""
    dec, mlp, curve = train(corpus, config)
    vocab = build_vocabulary([rec.text for rec in corpus], min_count=config.min_count)
    return CaptionModel(decoder=dec, projector=mlp, vocab=vocab), curve


def vocab_sidecar_path(model_path) -> str:
    return f"{model_path}.vocab.jsonl"


def save_caption_model(model: CaptionModel, path) -> None:
    save_model(path, model.decoder, model.projector)
    model.vocab.save(vocab_sidecar_path(path))


def load_caption_model(path) -> CaptionModel:
    dec, mlp = load_model(path)
    vocab = Vocabulary.load(vocab_sidecar_path(path))
    return CaptionModel(decoder=dec, projector=mlp, vocab=vocab)
