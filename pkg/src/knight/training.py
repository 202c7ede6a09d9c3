"""Decoder + projector training on retrieved-neighbor prefixes.

Each caption is decoded conditioned on the k most similar corpus captions'
embeddings (its own embedding excluded by default, and used directly when
k=0). Neighbor sets are static across epochs, so retrieval runs once up
front; only the projections are recomputed as the MLP moves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .decoder import (
    DecoderParams,
    _backward_batch,
    _forward_batch,
    _loss_and_grad,
    adam_init,
    adam_step,
    decoder_init,
)
from .errors import KTooLarge
from .index import CorpusIndex, top_k
from .projector import MlpParams, mlp_backward, mlp_forward, mlp_init
from .tokenizer import EOS_ID, PAD_ID, build_vocabulary


@dataclass(frozen=True)
class TrainingConfig:
    k: int = 5
    epochs: int = 30
    batch_size: int = 32
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    max_len: int = 32
    exclude_self: bool = True
    seed: int = 0
    d_model: int = 128
    n_layers: int = 2
    n_heads: int = 4
    d_hidden: int | None = None  # projector hidden width; None -> d_model
    prefix_positions: bool = True
    min_count: int = 1

    def __post_init__(self):
        if self.k < 0:
            raise ValueError(f"k must be >= 0, got {self.k}")
        if self.lr <= 0:
            raise ValueError(f"lr must be > 0, got {self.lr}")
        if self.epochs < 0 or self.batch_size < 1:
            raise ValueError("epochs must be >= 0 and batch_size >= 1")
        if self.seed < 0:
            raise ValueError(f"seed must be >= 0, got {self.seed}")
        if self.max_len < 2:
            raise ValueError(f"max_len must be >= 2, got {self.max_len}")
        if self.d_model % self.n_heads != 0:
            raise ValueError(
                f"d_model {self.d_model} not divisible by n_heads {self.n_heads}"
            )


def _stream_key(seed: int, stream: int) -> int:
    # Philox keys are independent per value; four streams per training seed
    # (decoder init, projector init, shuffling, spare).
    return (seed << 2) | stream


def train(
    corpus: CorpusIndex, config: TrainingConfig
) -> tuple[DecoderParams, MlpParams, list[float]]:
    """Returns (decoder, projector, per-epoch mean loss).

    Captions longer than the sequence budget (max_len - prefix - BOS) are
    truncated rather than rejected; at desk scale nothing hits the cap.
    """
    n = corpus.n
    pool = n - 1 if config.exclude_self else n
    if config.k > pool:
        raise KTooLarge(f"k={config.k} exceeds the {pool} available neighbors")

    texts = [rec.text for rec in corpus]
    vocab = build_vocabulary(texts, min_count=config.min_count)
    d_hidden = config.d_hidden if config.d_hidden is not None else config.d_model
    dec = decoder_init(
        vocab_size=len(vocab.id_to_token),
        d_model=config.d_model,
        n_layers=config.n_layers,
        n_heads=config.n_heads,
        max_len=config.max_len,
        seed=_stream_key(config.seed, 0),
        prefix_positions=config.prefix_positions,
    )
    mlp = mlp_init(
        d_in=corpus.dim,
        d_h=d_hidden,
        d_model=config.d_model,
        seed=_stream_key(config.seed, 1),
    )

    P = max(config.k, 1)  # k=0 conditions on the caption's own embedding
    token_budget = config.max_len - P - 1
    if token_budget < 1:
        raise ValueError(f"max_len {config.max_len} leaves no room for tokens after a {P}-entry prefix")

    prefixes = np.empty((n, P, corpus.dim), dtype=np.float32)
    token_rows: list[list[int]] = []
    for row, rec in enumerate(corpus):
        if config.k == 0:
            prefixes[row, 0] = rec.embedding
        else:
            exclude = rec.id if config.exclude_self else None
            hits = top_k(corpus, rec.embedding, config.k, exclude_id=exclude)
            for j, hit_id in enumerate(hits.ids):
                prefixes[row, j] = corpus.record(hit_id).embedding
        token_rows.append(vocab.encode(rec.text)[:token_budget])

    lengths = np.asarray([len(t) for t in token_rows], dtype=np.int64)
    t_max = int(lengths.max())
    tokens_all = np.full((n, t_max), PAD_ID, dtype=np.int64)
    targets_all = np.full((n, t_max + 1), PAD_ID, dtype=np.int64)
    for row, ids in enumerate(token_rows):
        tokens_all[row, : len(ids)] = ids
        targets_all[row, : len(ids)] = ids
        targets_all[row, len(ids)] = EOS_ID

    tensors = {**dec.tensors(), **mlp.tensors()}
    state = adam_init(tensors)
    shuffle_rng = np.random.Generator(np.random.Philox(key=_stream_key(config.seed, 2)))

    curve: list[float] = []
    for _ in range(config.epochs):
        perm = shuffle_rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, config.batch_size):
            idx = perm[start : start + config.batch_size]
            t_batch = max(int(lengths[idx].max()), 1)
            tok = tokens_all[idx][:, :t_batch]
            tgt = targets_all[idx][:, : t_batch + 1]
            mask = tgt != PAD_ID

            raw = prefixes[idx]
            flat_raw = raw.reshape(-1, corpus.dim)
            proj = np.asarray(mlp_forward(mlp, flat_raw)).reshape(len(idx), P, config.d_model)

            logits, cache = _forward_batch(dec, proj, tok)
            loss, dlogits = _loss_and_grad(logits, tgt, mask)
            grads, d_prefix = _backward_batch(dec, cache, dlogits)
            mlp_grads, _ = mlp_backward(mlp, flat_raw, d_prefix.reshape(-1, config.d_model))
            grads.update(mlp_grads)

            adam_step(
                tensors,
                grads,
                state,
                lr=config.lr,
                beta1=config.beta1,
                beta2=config.beta2,
                eps=config.eps,
            )
            epoch_loss += loss * len(idx)
        curve.append(epoch_loss / n)
    return dec, mlp, curve
