"""EMB1 on-disk embedding store: tweet id -> fixed-dimension float32 vector.

Layout, little-endian, no padding:

    magic  b"EMB1"
    u8     version (0x01)
    u32    dim
    u64    record count
    record | u16 id byte-length | id bytes (UTF-8) | dim * float32 |

Trailing bytes after the declared record count are a format error. A
duplicate tweet id keeps the last record and emits a warning.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import BinaryIO, Iterable

import numpy as np

from .errors import FormatError

MAGIC = b"EMB1"
VERSION = 1


@dataclass
class EmbeddingStore:
    dim: int
    entries: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.dim <= 0:
            raise ValueError("dim must be positive")

    def add(self, tweet_id: str, vector: Iterable[float]) -> None:
        arr = np.asarray(vector, dtype=np.float32)
        if arr.shape != (self.dim,):
            raise ValueError(f"vector for {tweet_id!r} has shape {arr.shape}, want ({self.dim},)")
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"vector for {tweet_id!r} has non-finite components")
        self.entries[tweet_id] = arr

    def get(self, tweet_id: str) -> np.ndarray | None:
        return self.entries.get(tweet_id)

    def __len__(self) -> int:
        return len(self.entries)


def _read_exact(stream: BinaryIO, n: int, offset: int, what: str) -> bytes:
    data = stream.read(n)
    if len(data) != n:
        raise FormatError(f"truncated {what} at byte offset {offset}")
    return data


def read_embedding_store(stream: BinaryIO) -> tuple[EmbeddingStore, list[str]]:
    """Read an EMB1 stream; returns (store, warnings)."""
    offset = 0
    magic = _read_exact(stream, 4, offset, "magic")
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r} at byte offset 0")
    offset += 4
    version = _read_exact(stream, 1, offset, "version")[0]
    if version != VERSION:
        raise FormatError(f"unsupported version {version} at byte offset {offset}")
    offset += 1
    dim = struct.unpack("<I", _read_exact(stream, 4, offset, "dim"))[0]
    if dim == 0:
        raise FormatError(f"dim=0 at byte offset {offset}")
    offset += 4
    count = struct.unpack("<Q", _read_exact(stream, 8, offset, "record count"))[0]
    offset += 8

    store = EmbeddingStore(dim=dim)
    warnings: list[str] = []
    vec_bytes = 4 * dim
    for _ in range(count):
        id_len = struct.unpack("<H", _read_exact(stream, 2, offset, "id length"))[0]
        offset += 2
        try:
            tweet_id = _read_exact(stream, id_len, offset, "id").decode("utf-8")
        except UnicodeDecodeError as exc:
            raise FormatError(f"id not valid UTF-8 at byte offset {offset}") from exc
        offset += id_len
        raw = _read_exact(stream, vec_bytes, offset, "vector")
        offset += vec_bytes
        vector = np.frombuffer(raw, dtype="<f4").astype(np.float32)
        if not np.all(np.isfinite(vector)):
            raise FormatError(f"non-finite vector component at byte offset {offset - vec_bytes}")
        if tweet_id in store.entries:
            warnings.append(f"duplicate id {tweet_id!r}, keeping last record")
        store.entries[tweet_id] = vector

    if stream.read(1):
        raise FormatError(f"trailing bytes after declared record count at byte offset {offset}")
    return store, warnings


def write_embedding_store(store: EmbeddingStore, stream: BinaryIO) -> None:
    stream.write(MAGIC)
    stream.write(bytes([VERSION]))
    stream.write(struct.pack("<I", store.dim))
    stream.write(struct.pack("<Q", len(store.entries)))
    for tweet_id, vector in store.entries.items():
        encoded = tweet_id.encode("utf-8")
        if len(encoded) > 0xFFFF:
            raise ValueError(f"id too long to encode: {tweet_id[:40]!r}...")
        stream.write(struct.pack("<H", len(encoded)))
        stream.write(encoded)
        stream.write(np.asarray(vector, dtype="<f4").tobytes())


def read_store_file(path: str) -> tuple[EmbeddingStore, list[str]]:
    with open(path, "rb") as fh:
        return read_embedding_store(fh)


def write_store_file(store: EmbeddingStore, path: str) -> None:
    with open(path, "wb") as fh:
        write_embedding_store(store, fh)
