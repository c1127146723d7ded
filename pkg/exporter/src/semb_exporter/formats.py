"""Sentence input (JSONL) and embedding-store output (SEMB version 1).

The store layout is frozen and little-endian throughout:

    magic   b"SEMB"
    version u32      (this exporter writes version 1, the plain store)
    dim     u32      > 0
    count   u64
    ids     count x (len u32, UTF-8 bytes)
    vectors count x dim x f32, row-major

No padding, no compression, nothing after the vector block. Files written
here are byte-for-byte comparable with any other conforming writer.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .errors import ExportError

MAGIC = b"SEMB"
VERSION = 1


def read_sentences(path) -> list[tuple[str, str]]:
    """Read an {id, text} JSONL file into an ordered list of (id, text).

    Blank lines are skipped. Ids must be non-empty and unique; text is kept
    verbatim (embedding backends decide their own normalization).
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
                raise ExportError(f"{path}: line {lineno}: malformed JSON ({exc.msg})") from exc
            if not isinstance(record, dict) or "id" not in record or "text" not in record:
                raise ExportError(f"{path}: line {lineno}: expected an object with id and text")
            id_, text = str(record["id"]), str(record["text"])
            if not id_:
                raise ExportError(f"{path}: line {lineno}: empty id")
            if id_ in seen:
                raise ExportError(f"{path}: line {lineno}: duplicate id {id_!r}")
            seen.add(id_)
            sentences.append((id_, text))
    return sentences


def write_store(path, ids: list[str], vectors: np.ndarray) -> None:
    """Write a version-1 SEMB store; row i of ``vectors`` belongs to ids[i]."""
    vectors = np.ascontiguousarray(vectors, dtype=np.float32)
    if vectors.ndim != 2 or vectors.shape[0] != len(ids):
        raise ExportError(
            f"vector block has shape {vectors.shape}, expected ({len(ids)}, dim)")
    dim = vectors.shape[1]
    if dim < 1:
        raise ExportError("dim must be positive")
    if vectors.size and not np.isfinite(vectors).all():
        raise ExportError("embeddings contain non-finite components")
    if len(set(ids)) != len(ids):
        raise ExportError("duplicate ids")

    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<IQ", dim, len(ids)))
        for id_ in ids:
            raw = id_.encode("utf-8")
            fh.write(struct.pack("<I", len(raw)))
            fh.write(raw)
        fh.write(vectors.tobytes())
