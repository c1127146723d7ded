"""Teacher-side embeddings: the binary id -> vector store and a pseudo-teacher.

The store format ("SEMB") is the toolkit's interchange format for fixed-width
float32 embeddings. The layout is frozen, little-endian throughout, so files
can be produced by out-of-process exporters and compared byte-for-byte:

    magic   b"SEMB"
    version u32      (1 = plain store; 2 = normalized index, see index module)
    [flag   u8]      version 2 only: 1 marks rows L2-normalized
    dim     u32      > 0
    count   u64
    ids     count x (len u32, UTF-8 bytes)
    vectors count x dim x f32, row-major

No padding, no compression. A file must parse to exactly its byte length;
anything short is "truncated", anything long is rejected as trailing data.
"""

from __future__ import annotations

import hashlib
import json
import math
import struct
import unicodedata
from dataclasses import dataclass, field

import numpy as np

from .errors import CorpusError, StoreFormatError
from .rng import MASK64

MAGIC = b"SEMB"
VERSION_STORE = 1
VERSION_INDEX = 2


@dataclass
class EmbeddingStore:
    """Ordered id -> float32 vector map with a fixed dimension."""

    dim: int
    ids: list[str]
    vectors: np.ndarray  # (count, dim) float32; row i belongs to ids[i]
    _row_of: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.dim < 1:
            raise StoreFormatError(f"dim must be positive, got {self.dim}")
        self.vectors = np.asarray(self.vectors, dtype=np.float32)
        if self.vectors.shape != (len(self.ids), self.dim):
            raise StoreFormatError(
                f"vector block has shape {self.vectors.shape}, "
                f"expected ({len(self.ids)}, {self.dim})"
            )
        if self.vectors.size and not np.isfinite(self.vectors).all():
            raise StoreFormatError("store contains non-finite vector components")
        self._row_of = {}
        for row, id_ in enumerate(self.ids):
            if id_ in self._row_of:
                raise StoreFormatError(f"duplicate id {id_!r}")
            self._row_of[id_] = row

    def __len__(self) -> int:
        return len(self.ids)

    def get(self, id_: str) -> np.ndarray | None:
        """Vector for ``id_``, or None when absent (the not-found signal)."""
        row = self._row_of.get(id_)
        return None if row is None else self.vectors[row]

    def __getitem__(self, id_: str) -> np.ndarray:
        row = self._row_of.get(id_)
        if row is None:
            raise KeyError(id_)
        return self.vectors[row]

    def __contains__(self, id_: str) -> bool:
        return id_ in self._row_of


def lookup(store: EmbeddingStore, id_: str) -> np.ndarray | None:
    """Functional alias for EmbeddingStore.get."""
    return store.get(id_)


# ---------------------------------------------------------------------------
# binary serialization (shared with the index module, which uses version 2)

def serialize_semb(
    dim: int, ids: list[str], vectors: np.ndarray, *, version: int = VERSION_STORE,
    flag: int | None = None,
) -> bytes:
    parts = [MAGIC, struct.pack("<I", version)]
    if version == VERSION_INDEX:
        parts.append(struct.pack("<B", 1 if flag else 0))
    parts.append(struct.pack("<IQ", dim, len(ids)))
    for id_ in ids:
        raw = id_.encode("utf-8")
        parts.append(struct.pack("<I", len(raw)))
        parts.append(raw)
    vectors = np.ascontiguousarray(vectors, dtype=np.float32)
    parts.append(vectors.tobytes())
    return b"".join(parts)


def deserialize_semb(data: bytes, label: str) -> tuple[int, int | None, int, list[str], np.ndarray]:
    """Parse an SEMB payload; returns (version, flag, dim, ids, vectors)."""
    view = memoryview(data)
    pos = 0

    def take(n: int, what: str) -> memoryview:
        nonlocal pos
        if pos + n > len(view):
            raise StoreFormatError(f"{label}: truncated file while reading {what}")
        chunk = view[pos:pos + n]
        pos += n
        return chunk

    if bytes(take(4, "magic")) != MAGIC:
        raise StoreFormatError(f"{label}: bad magic")
    (version,) = struct.unpack("<I", take(4, "version"))
    if version not in (VERSION_STORE, VERSION_INDEX):
        raise StoreFormatError(f"{label}: unsupported version {version}")
    flag = None
    if version == VERSION_INDEX:
        (flag,) = struct.unpack("<B", take(1, "flag"))
    dim, count = struct.unpack("<IQ", take(12, "header"))
    if dim == 0:
        raise StoreFormatError(f"{label}: dim must be positive")
    ids = []
    for i in range(count):
        (id_len,) = struct.unpack("<I", take(4, f"id length {i}"))
        ids.append(bytes(take(id_len, f"id {i}")).decode("utf-8"))
    vec_bytes = take(count * dim * 4, "vector block")
    if pos != len(view):
        raise StoreFormatError(f"{label}: {len(view) - pos} trailing bytes")
    vectors = np.frombuffer(vec_bytes, dtype="<f4").reshape(count, dim).copy()
    return version, flag, dim, ids, vectors


def save_store(store: EmbeddingStore, path) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize_semb(store.dim, store.ids, store.vectors))


def load_store(path) -> EmbeddingStore:
    with open(path, "rb") as fh:
        data = fh.read()
    version, _, dim, ids, vectors = deserialize_semb(data, str(path))
    if version != VERSION_STORE:
        raise StoreFormatError(f"{path}: version {version} is an index file, not a store")
    return EmbeddingStore(dim=dim, ids=ids, vectors=vectors)


# ---------------------------------------------------------------------------
# pseudo-teacher

def pseudo_teacher(sentence: str, dim: int, seed: int) -> np.ndarray:
    """Deterministic hash-derived unit vector standing in for a neural teacher.

    Component i is derived from SHA-256(seed as 8 LE bytes || NFC(sentence)
    UTF-8 bytes || i as 8 LE bytes): the first 8 digest bytes, read
    little-endian, give u in [0, 1); the raw component is 2u - 1 in float64.
    The raw vector is L2-normalized in float64 with squares summed in
    ascending component order, then each component is rounded to float32.
    Identical (sentence, dim, seed) give identical bytes on every platform;
    independent implementations of this recipe must agree byte-for-byte.
    """
    if dim < 1:
        raise ValueError(f"dim must be positive, got {dim}")
    if not 0 <= seed <= MASK64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    seed_bytes = seed.to_bytes(8, "little")
    text_bytes = unicodedata.normalize("NFC", sentence).encode("utf-8")
    raw = [0.0] * dim
    for i in range(dim):
        digest = hashlib.sha256(
            seed_bytes + text_bytes + i.to_bytes(8, "little")
        ).digest()
        u = int.from_bytes(digest[:8], "little") / 2**64
        raw[i] = 2.0 * u - 1.0
    norm_sq = 0.0
    for i in range(dim):
        norm_sq += raw[i] * raw[i]
    norm = math.sqrt(norm_sq)
    if norm == 0.0:
        raise ValueError("degenerate all-zero pseudo vector")
    out = np.empty(dim, dtype=np.float32)
    for i in range(dim):
        out[i] = np.float32(raw[i] / norm)
    return out


def pseudo_store(sentences: list[tuple[str, str]], dim: int, seed: int) -> EmbeddingStore:
    """Build a store mapping each (id, text) to its pseudo-teacher vector."""
    ids = [id_ for id_, _ in sentences]
    vectors = np.empty((len(sentences), dim), dtype=np.float32)
    for row, (_, text) in enumerate(sentences):
        vectors[row] = pseudo_teacher(text, dim, seed)
    return EmbeddingStore(dim=dim, ids=ids, vectors=vectors)


def read_sentences_jsonl(path) -> list[tuple[str, str]]:
    """Read a JSONL file of {id, text} records, preserving order.

    Ids must be unique and non-empty; text is taken verbatim (pseudo_teacher
    NFC-normalizes internally).
    """
    sentences: list[tuple[str, str]] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}: line {lineno}: malformed JSON ({exc.msg})") from exc
            if not isinstance(record, dict) or "id" not in record or "text" not in record:
                raise CorpusError(f"{path}: line {lineno}: expected an object with id and text")
            id_, text = str(record["id"]), str(record["text"])
            if not id_:
                raise CorpusError(f"{path}: line {lineno}: empty id")
            if id_ in seen:
                raise CorpusError(f"{path}: line {lineno}: duplicate id {id_!r}")
            seen.add(id_)
            sentences.append((id_, text))
    return sentences
