"""Embedding backends: the deterministic pseudo teacher and real models.

A "real" model is any object with an ``encode(texts: list[str])`` method
returning a (len(texts), dim) array. The exporter batches inference but
always writes rows in input order, and never alters what the model
returned beyond an optional L2 normalization (off by default).
"""

from __future__ import annotations

import hashlib
import math
import unicodedata

import numpy as np

from .errors import ExportError
from .formats import write_store

MASK64 = (1 << 64) - 1


def pseudo_vector(text: str, dim: int, seed: int) -> np.ndarray:
    """Deterministic unit vector derived from SHA-256, as float32.

    Component i comes from SHA-256(seed as 8 LE bytes || NFC(text) UTF-8
    bytes || i as 8 LE bytes): the first 8 digest bytes read little-endian
    give u in [0, 1), and the raw float64 component is 2u - 1. The raw
    vector is L2-normalized in float64 (squares summed in ascending
    component order), then rounded per component to float32. Any conforming
    implementation produces identical bytes for identical inputs.
    """
    if dim < 1:
        raise ExportError(f"dim must be positive, got {dim}")
    if not 0 <= seed <= MASK64:
        raise ExportError(f"seed must be an unsigned 64-bit integer, got {seed}")
    seed_bytes = seed.to_bytes(8, "little")
    text_bytes = unicodedata.normalize("NFC", text).encode("utf-8")
    raw = []
    for i in range(dim):
        digest = hashlib.sha256(
            seed_bytes + text_bytes + i.to_bytes(8, "little")).digest()
        u = int.from_bytes(digest[:8], "little") / 2**64
        raw.append(2.0 * u - 1.0)
    norm_sq = 0.0
    for component in raw:
        norm_sq += component * component
    norm = math.sqrt(norm_sq)
    if norm == 0.0:
        raise ExportError("degenerate all-zero pseudo vector")
    return (np.array(raw, dtype=np.float64) / norm).astype(np.float32)


def export_pseudo(sentences: list[tuple[str, str]], dim: int, seed: int, out_path) -> int:
    """Write pseudo-teacher embeddings for (id, text) pairs; returns the count."""
    ids = [id_ for id_, _ in sentences]
    vectors = np.empty((len(sentences), dim), dtype=np.float32)
    for row, (_, text) in enumerate(sentences):
        vectors[row] = pseudo_vector(text, dim, seed)
    write_store(out_path, ids, vectors)
    return len(ids)


def export_real(sentences: list[tuple[str, str]], model, out_path, *,
                normalize: bool = False, batch_size: int = 64) -> int:
    """Embed (id, text) pairs with ``model.encode`` and write the store.

    Inference runs batch by batch, but rows land in input order. With
    ``normalize=True`` each row is L2-normalized in float64 before the
    float32 write; otherwise rows are written exactly as returned.
    Returns the number of rows written.
    """
    if batch_size < 1:
        raise ExportError(f"batch_size must be positive, got {batch_size}")
    ids = [id_ for id_, _ in sentences]
    texts = [text for _, text in sentences]

    blocks: list[np.ndarray] = []
    dim: int | None = None
    for start in range(0, len(texts), batch_size):
        chunk = texts[start:start + batch_size]
        block = np.asarray(model.encode(chunk))
        if block.ndim != 2 or block.shape[0] != len(chunk):
            raise ExportError(
                f"model returned shape {block.shape} for a batch of {len(chunk)}")
        if dim is None:
            dim = int(block.shape[1])
            if dim < 1:
                raise ExportError("model returned zero-width embeddings")
        elif block.shape[1] != dim:
            raise ExportError(
                f"model changed embedding width from {dim} to {block.shape[1]}")
        blocks.append(block)

    if not blocks:
        raise ExportError("no sentences to export")
    vectors = np.concatenate(blocks, axis=0)
    if normalize:
        as64 = vectors.astype(np.float64)
        norms = np.linalg.norm(as64, axis=1)
        if (norms == 0.0).any():
            zero_row = int(np.argmin(norms))
            raise ExportError(f"cannot normalize zero vector for id {ids[zero_row]!r}")
        vectors = as64 / norms[:, None]
    write_store(out_path, ids, vectors.astype(np.float32))
    return len(ids)
