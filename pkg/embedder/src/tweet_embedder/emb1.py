"""EMB1 writer: tweet id -> float32 vector, little-endian, no padding.

Layout: magic b"EMB1", u8 version (1), u32 dim, u64 record count, then per
record a u16 id byte-length, the UTF-8 id bytes, and dim float32 values.
"""
from __future__ import annotations

import struct
from typing import BinaryIO, Iterable

import numpy as np

MAGIC = b"EMB1"
VERSION = 1


def write_store(stream: BinaryIO, dim: int, records: Iterable[tuple[str, np.ndarray]]) -> int:
    """Write records in iteration order; returns the number written.

    The record count field is patched after writing, so the iterable may be
    lazy; the stream must therefore be seekable.
    """
    if dim <= 0:
        raise ValueError("dim must be positive")
    stream.write(MAGIC)
    stream.write(bytes([VERSION]))
    stream.write(struct.pack("<I", dim))
    count_pos = stream.tell()
    stream.write(struct.pack("<Q", 0))
    count = 0
    for tweet_id, vector in records:
        encoded = tweet_id.encode("utf-8")
        if len(encoded) > 0xFFFF:
            raise ValueError(f"id too long: {tweet_id[:40]!r}...")
        arr = np.asarray(vector, dtype="<f4")
        if arr.shape != (dim,):
            raise ValueError(f"vector for {tweet_id!r} has shape {arr.shape}, want ({dim},)")
        stream.write(struct.pack("<H", len(encoded)))
        stream.write(encoded)
        stream.write(arr.tobytes())
        count += 1
    end = stream.tell()
    stream.seek(count_pos)
    stream.write(struct.pack("<Q", count))
    stream.seek(end)
    return count
