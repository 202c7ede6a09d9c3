"""KNEM writer: the little-endian embedding-matrix container (version 1).

Layout:
    offset 0   magic  b"KNEM"
    offset 4   u32    version = 1
    offset 8   u64    count
    offset 16  u32    dim
    offset 20  u32    reserved = 0
    offset 24  f32[count * dim] row-major payload

This is the only surface shared with the captioning pipeline, which is
why the format is implemented here from scratch rather than imported:
the file bytes, not a Python API, are the contract.
"""

import struct
from pathlib import Path

import numpy as np

MAGIC = b"KNEM"
VERSION = 1
_HEADER = struct.Struct("<4sIQII")


def write_knem(rows: np.ndarray, path) -> None:
    arr = np.asarray(rows, dtype=np.float32)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {arr.shape}")
    header = _HEADER.pack(MAGIC, VERSION, arr.shape[0], arr.shape[1], 0)
    Path(path).write_bytes(header + arr.astype("<f4").tobytes())
