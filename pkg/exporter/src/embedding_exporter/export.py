"""Batch export: manifest in, KNEM matrix + row-aligned id sidecar out."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .encoders import load_encoder
from .errors import CorruptInput
from .knem import write_knem
from .manifest import load_manifest

ZERO_NORM_THRESHOLD = 1e-12


@dataclass(frozen=True)
class ExportJob:
    manifest: str
    encoder: str
    out: str
    batch_size: int = 32

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")


@dataclass(frozen=True)
class ExportResult:
    count: int
    dim: int
    out: str
    ids_path: str


def ids_sidecar_path(out) -> str:
    return f"{out}.ids.jsonl"


def export_embeddings(job: ExportJob, encoder=None) -> ExportResult:
    """Encode every manifest entry, in order, and write the results.

    Rows are unit-normalized (float64 accumulate, float32 on disk) because
    real encoder outputs are rarely exactly unit-norm while the consumer
    scores by plain dot product. Batching is an implementation detail: the
    output bytes are identical for any batch_size.
    """
    entries = load_manifest(job.manifest)
    enc = encoder if encoder is not None else load_encoder(job.encoder)

    blocks = []
    for start in range(0, len(entries), job.batch_size):
        batch = entries[start : start + job.batch_size]
        payloads = [e.payload for e in batch]
        if batch[0].kind == "text":
            vecs = enc.encode_text(payloads)
        else:
            vecs = enc.encode_image(payloads)
        vecs = np.asarray(vecs, dtype=np.float64)
        if vecs.shape != (len(batch), enc.dim):
            raise CorruptInput(
                job.manifest,
                f"encoder returned shape {vecs.shape} for a batch of "
                f"{len(batch)} (dim {enc.dim})",
            )
        blocks.append(vecs)

    mat = np.vstack(blocks)
    norms = np.linalg.norm(mat, axis=1, keepdims=True)
    dead = np.flatnonzero(norms < ZERO_NORM_THRESHOLD)
    if dead.size:
        raise CorruptInput(
            job.manifest, f"zero-norm embedding for entry id {entries[int(dead[0])].id}"
        )
    write_knem((mat / norms).astype(np.float32), job.out)

    ids_path = ids_sidecar_path(job.out)
    with open(ids_path, "w", encoding="utf-8") as fh:
        for row, entry in enumerate(entries):
            fh.write(json.dumps({"row": row, "id": entry.id}) + "\n")
    return ExportResult(count=len(entries), dim=enc.dim, out=str(job.out), ids_path=ids_path)
