"""Corpus ingestion and binary persistence.

Two little-endian binary formats, stable under version 1:

KNEM (embedding matrix)
    offset 0   magic  b"KNEM"
    offset 4   u32    version = 1
    offset 8   u64    count
    offset 16  u32    dim
    offset 20  u32    reserved = 0
    offset 24  f32[count * dim] row-major payload

KNCK (named tensor checkpoint)
    offset 0   magic  b"KNCK"
    offset 4   u32    version = 1
    offset 8   u32    tensor count
    per tensor u32 name length, UTF-8 name, u32 rank, u32 dims[rank],
               f32[prod(dims)] row-major payload

Caption corpora are JSONL files of {"id": int, "text": str}, row-aligned
with a sidecar KNEM file. Embeddings are normalized on load because real
encoder exports are rarely exactly unit-norm.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import (
    BadMagic,
    BadVersion,
    CountMismatch,
    DuplicateId,
    MalformedLine,
    TruncatedPayload,
    ZeroVector,
)
from .index import CaptionRecord
from .vectors import normalize

KNEM_MAGIC = b"KNEM"
KNCK_MAGIC = b"KNCK"
FORMAT_VERSION = 1

_KNEM_HEADER = struct.Struct("<4sIQII")  # magic, version, count, dim, reserved


def write_embeddings(vectors, path, dim: int | None = None) -> None:
    """Write a list/array of same-dim vectors as a KNEM file.

    dim is only needed when vectors is empty and the header should still
    carry a width.
    """
    rows = [np.asarray(v, dtype=np.float32) for v in vectors]
    if rows:
        width = rows[0].shape[0]
        for v in rows:
            if v.ndim != 1 or v.shape[0] != width:
                raise CountMismatch(f"inconsistent vector dims: {v.shape} vs ({width},)")
        if dim is not None and dim != width:
            raise CountMismatch(f"explicit dim {dim} disagrees with vectors ({width})")
    else:
        width = dim if dim is not None else 0
    payload = (
        np.stack(rows).astype("<f4").tobytes()
        if rows
        else b""
    )
    header = _KNEM_HEADER.pack(KNEM_MAGIC, FORMAT_VERSION, len(rows), width, 0)
    Path(path).write_bytes(header + payload)


def read_embeddings(path) -> np.ndarray:
    """Read a KNEM file into a (count, dim) float32 array."""
    raw = Path(path).read_bytes()
    if len(raw) < _KNEM_HEADER.size:
        raise TruncatedPayload(f"{path}: file shorter than the 24-byte header")
    magic, version, count, width, _reserved = _KNEM_HEADER.unpack_from(raw, 0)
    if magic != KNEM_MAGIC:
        raise BadMagic(f"{path}: expected {KNEM_MAGIC!r}, got {magic!r}")
    if version != FORMAT_VERSION:
        raise BadVersion(f"{path}: unsupported KNEM version {version}")
    expected = count * width * 4
    body = raw[_KNEM_HEADER.size:]
    if len(body) != expected:
        raise TruncatedPayload(
            f"{path}: payload is {len(body)} bytes, header declares {expected}"
        )
    data = np.frombuffer(body, dtype="<f4").astype(np.float32)
    return data.reshape(count, width)


def load_caption_lines(path) -> list[tuple[int, str]]:
    """Read JSONL {"id": int, "text": str} lines in file order."""
    texts: list[tuple[int, str]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                raise MalformedLine("blank line in caption corpus", lineno)
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedLine(f"invalid JSON: {exc}", lineno) from exc
            if not isinstance(obj, dict):
                raise MalformedLine("expected a JSON object", lineno)
            if not isinstance(obj.get("id"), int) or isinstance(obj.get("id"), bool):
                raise MalformedLine('missing or non-integer "id"', lineno)
            if not isinstance(obj.get("text"), str) or not obj["text"].strip():
                raise MalformedLine('missing or empty "text"', lineno)
            texts.append((obj["id"], obj["text"]))
    return texts


def load_corpus(captions_path, embeddings_path) -> list[CaptionRecord]:
    """Pair JSONL caption lines with KNEM rows, normalizing each embedding.

    Line i of the JSONL owns row i of the KNEM file. Lines are never
    dropped or reordered; counts must agree exactly.
    """
    texts = load_caption_lines(captions_path)
    matrix = read_embeddings(embeddings_path)
    if matrix.shape[0] != len(texts):
        raise CountMismatch(
            f"{len(texts)} caption lines but {matrix.shape[0]} embedding rows"
        )
    records = []
    for row, (rec_id, text) in enumerate(texts):
        try:
            emb = normalize(matrix[row])
        except ZeroVector as exc:
            raise ZeroVector(f"embedding row {row} (id {rec_id}): {exc}") from exc
        records.append(CaptionRecord(id=rec_id, text=text, embedding=emb))
    return records


def save_checkpoint(tensors: dict[str, np.ndarray], path) -> None:
    """Serialize named float32 tensors to a KNCK file."""
    names = list(tensors.keys())
    if len(set(names)) != len(names):
        raise DuplicateId("tensor names must be unique")
    parts = [struct.pack("<4sII", KNCK_MAGIC, FORMAT_VERSION, len(names))]
    for name in names:
        arr = np.ascontiguousarray(tensors[name], dtype="<f4")
        encoded = name.encode("utf-8")
        parts.append(struct.pack("<I", len(encoded)))
        parts.append(encoded)
        parts.append(struct.pack("<I", arr.ndim))
        parts.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        parts.append(arr.tobytes())
    Path(path).write_bytes(b"".join(parts))


def load_checkpoint(path) -> dict[str, np.ndarray]:
    """Read a KNCK file back into an ordered name -> float32 array map."""
    raw = Path(path).read_bytes()
    if len(raw) < 12:
        raise TruncatedPayload(f"{path}: file shorter than the 12-byte header")
    magic, version, count = struct.unpack_from("<4sII", raw, 0)
    if magic != KNCK_MAGIC:
        raise BadMagic(f"{path}: expected {KNCK_MAGIC!r}, got {magic!r}")
    if version != FORMAT_VERSION:
        raise BadVersion(f"{path}: unsupported KNCK version {version}")
    offset = 12
    tensors: dict[str, np.ndarray] = {}

    def take(nbytes: int) -> bytes:
        nonlocal offset
        if offset + nbytes > len(raw):
            raise TruncatedPayload(f"{path}: tensor table ends early at byte {offset}")
        chunk = raw[offset : offset + nbytes]
        offset += nbytes
        return chunk

    for _ in range(count):
        (name_len,) = struct.unpack("<I", take(4))
        name = take(name_len).decode("utf-8")
        if name in tensors:
            raise DuplicateId(f"{path}: duplicate tensor name {name!r}")
        (rank,) = struct.unpack("<I", take(4))
        dims = struct.unpack(f"<{rank}I", take(4 * rank)) if rank else ()
        size = int(np.prod(dims, dtype=np.int64)) if dims else 1
        data = np.frombuffer(take(4 * size), dtype="<f4").astype(np.float32)
        tensors[name] = data.reshape(dims)
    if offset != len(raw):
        raise TruncatedPayload(f"{path}: {len(raw) - offset} trailing bytes after tensors")
    return tensors


def load_candidates(path) -> dict[int, str]:
    """JSONL {"id": int, "caption": str} keyed by id."""
    out: dict[int, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedLine(f"invalid JSON: {exc}", lineno) from exc
            if (
                not isinstance(obj, dict)
                or not isinstance(obj.get("id"), int)
                or not isinstance(obj.get("caption"), str)
            ):
                raise MalformedLine('expected {"id": int, "caption": str}', lineno)
            if obj["id"] in out:
                raise DuplicateId(f"duplicate candidate id {obj['id']}")
            out[obj["id"]] = obj["caption"]
    return out


def load_references(path) -> dict[int, list[str]]:
    """JSONL {"id": int, "captions": [str, ...]} keyed by id."""
    out: dict[int, list[str]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedLine(f"invalid JSON: {exc}", lineno) from exc
            caps = obj.get("captions") if isinstance(obj, dict) else None
            if (
                not isinstance(obj, dict)
                or not isinstance(obj.get("id"), int)
                or not isinstance(caps, list)
                or not caps
                or not all(isinstance(c, str) for c in caps)
            ):
                raise MalformedLine('expected {"id": int, "captions": [str, ...]}', lineno)
            if obj["id"] in out:
                raise DuplicateId(f"duplicate reference id {obj['id']}")
            out[obj["id"]] = list(caps)
    return out


def write_jsonl(rows, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
