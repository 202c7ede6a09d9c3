"""Encoder backends.

An encoder is any object with an integer `dim`, `encode_text(list[str])`,
and `encode_image(list[path])`, each returning a (batch, dim) array.
Backends load lazily and in deterministic eval mode; anything that stops
a backend from coming up (missing package, unreachable weights) surfaces
as EncoderLoadError so callers can fall back or skip.
"""

from __future__ import annotations

import numpy as np

from .errors import CorruptInput, EncoderLoadError


class ClipEncoder:
    """CLIP ViT-B/32 dual encoder via sentence-transformers (512-wide)."""

    name = "clip-vit-b32"

    def __init__(self):
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise EncoderLoadError(
                "sentence-transformers is not installed; "
                "install the exporter's [clip] extra"
            ) from exc
        try:
            self._model = SentenceTransformer("clip-ViT-B-32", device="cpu")
        except Exception as exc:  # hub/network/cache failures vary by version
            raise EncoderLoadError(f"cannot load clip-ViT-B-32 weights: {exc}") from exc
        self._model.eval()
        self.dim = int(self._model.get_sentence_embedding_dimension() or 512)

    def _encode(self, batch) -> np.ndarray:
        out = self._model.encode(
            batch,
            batch_size=max(1, len(batch)),
            convert_to_numpy=True,
            normalize_embeddings=False,
            show_progress_bar=False,
        )
        return np.asarray(out, dtype=np.float64)

    def encode_text(self, batch) -> np.ndarray:
        return self._encode([str(t) for t in batch])

    def encode_image(self, batch) -> np.ndarray:
        from PIL import Image

        images = []
        for path in batch:
            try:
                images.append(Image.open(path).convert("RGB"))
            except OSError as exc:
                raise CorruptInput(path, f"unreadable image: {exc}") from exc
        return self._encode(images)


_REGISTRY = {ClipEncoder.name: ClipEncoder}


def available_encoders() -> list[str]:
    return sorted(_REGISTRY)


def load_encoder(name: str):
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise EncoderLoadError(
            f"unknown encoder {name!r}; available: {', '.join(available_encoders())}"
        ) from None
    return factory()
