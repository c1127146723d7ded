"""Student sentence encoder: hashed character n-grams, mean pooling, affine map.

The model is deliberately linear in its parameters so the trainer can use
closed-form gradients: a text becomes a bag of hashed n-gram counts, the
matching rows of an embedding table are mean-pooled, and a single affine
projection maps the pooled vector to the teacher dimension.

Checkpoint format (all integers little-endian):
    magic "SMDL" | version u32 = 1
    | ngram_min u32 | ngram_max u32 | buckets u64 | hidden_dim u32
    | out_dim u32 | hash_seed u64
    | E row-major f32 (buckets x hidden_dim)
    | W row-major f32 (out_dim x hidden_dim)
    | b f32 (out_dim)
No padding, no compression; truncated or oversized files are rejected.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import StoreFormatError
from .rng import MASK64, Xoshiro256StarStar

MODEL_MAGIC = b"SMDL"
MODEL_VERSION = 1

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


@dataclass
class EncoderConfig:
    """Feature hashing and projection dimensions."""

    ngram_min: int = 3
    ngram_max: int = 5
    buckets: int = 2 ** 18
    hidden_dim: int = 256
    out_dim: int = 768
    hash_seed: int = 0x5EED

    def __post_init__(self):
        if not 1 <= self.ngram_min <= self.ngram_max:
            raise ValueError(
                f"need 1 <= ngram_min <= ngram_max, got {self.ngram_min}..{self.ngram_max}"
            )
        if self.buckets < 2 or self.buckets & (self.buckets - 1):
            raise ValueError(f"buckets must be a power of two >= 2, got {self.buckets}")
        if self.hidden_dim < 1 or self.out_dim < 1:
            raise ValueError("hidden_dim and out_dim must be positive")
        if not 0 <= self.hash_seed <= MASK64:
            raise ValueError("hash_seed must be an unsigned 64-bit integer")


@dataclass
class StudentModel:
    """Trainable parameters: E (buckets x d_h), W (d_t x d_h), b (d_t)."""

    config: EncoderConfig
    E: np.ndarray
    W: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        cfg = self.config
        for name, arr, shape in (
            ("E", self.E, (cfg.buckets, cfg.hidden_dim)),
            ("W", self.W, (cfg.out_dim, cfg.hidden_dim)),
            ("b", self.b, (cfg.out_dim,)),
        ):
            if arr.shape != shape:
                raise ValueError(f"{name} has shape {arr.shape}, expected {shape}")
            if arr.dtype != np.float32:
                raise ValueError(f"{name} must be float32, got {arr.dtype}")

    def copy(self) -> "StudentModel":
        return StudentModel(self.config, self.E.copy(), self.W.copy(), self.b.copy())


def _fnv1a64(data: bytes, seed: int) -> int:
    """Seeded 64-bit FNV-1a: the seed's 8 little-endian bytes are hashed first."""
    h = _FNV_OFFSET
    for byte in seed.to_bytes(8, "little") + data:
        h = ((h ^ byte) * _FNV_PRIME) & MASK64
    return h


def featurize(text: str, config: EncoderConfig) -> list[tuple[int, int]]:
    """Hashed character n-gram counts for one text, sorted by bucket index.

    The text is case-folded and padded with '#' at both ends; every n-gram
    with ngram_min <= n <= ngram_max is hashed modulo the bucket count.
    Empty text yields no features.
    """
    if not text:
        return []
    padded = "#" + text.casefold() + "#"
    mask = config.buckets - 1
    seed = config.hash_seed
    counts: dict[int, int] = {}
    for n in range(config.ngram_min, config.ngram_max + 1):
        for start in range(len(padded) - n + 1):
            bucket = _fnv1a64(padded[start:start + n].encode("utf-8"), seed) & mask
            counts[bucket] = counts.get(bucket, 0) + 1
    return sorted(counts.items())


def feature_arrays(text: str, config: EncoderConfig) -> tuple[np.ndarray, np.ndarray]:
    """featurize() as parallel (bucket_index int64, count float64) arrays."""
    feats = featurize(text, config)
    idx = np.fromiter((f for f, _ in feats), dtype=np.int64, count=len(feats))
    cnt = np.fromiter((c for _, c in feats), dtype=np.float64, count=len(feats))
    return idx, cnt


def pool64(model: StudentModel, idx: np.ndarray, cnt: np.ndarray) -> np.ndarray:
    """Count-weighted mean of E rows, in 64-bit floats; zeros for no features."""
    if idx.size == 0:
        return np.zeros(model.config.hidden_dim, dtype=np.float64)
    rows = model.E[idx].astype(np.float64)
    return (rows.T @ cnt) / cnt.sum()


def project64(model: StudentModel, pooled: np.ndarray) -> np.ndarray:
    """W @ pooled + b, in 64-bit floats."""
    return model.W.astype(np.float64) @ pooled + model.b.astype(np.float64)


def encode(model: StudentModel, text: str) -> np.ndarray:
    """Embed one text as a float32 vector of length out_dim."""
    idx, cnt = feature_arrays(text, model.config)
    return project64(model, pool64(model, idx, cnt)).astype(np.float32)


def encode_batch(model: StudentModel, texts: list[str]) -> np.ndarray:
    """Embed texts as a (len(texts), out_dim) float32 matrix, row i == encode(texts[i])."""
    if not texts:
        return np.zeros((0, model.config.out_dim), dtype=np.float32)
    return np.stack([encode(model, text) for text in texts])


def init_student(config: EncoderConfig, seed: int) -> StudentModel:
    """Fresh model with seeded uniform parameters.

    Draw order is fixed for reproducibility: E row-major on (-0.05, 0.05),
    then W row-major on (-r, r) with r = sqrt(1 / hidden_dim); b starts at
    zero.
    """
    rng = Xoshiro256StarStar(seed)
    E = np.asarray(
        rng.fill_uniform(config.buckets * config.hidden_dim, -0.05, 0.05),
        dtype=np.float64,
    ).astype(np.float32).reshape(config.buckets, config.hidden_dim)
    limit = float(np.sqrt(1.0 / config.hidden_dim))
    W = np.asarray(
        rng.fill_uniform(config.out_dim * config.hidden_dim, -limit, limit),
        dtype=np.float64,
    ).astype(np.float32).reshape(config.out_dim, config.hidden_dim)
    b = np.zeros(config.out_dim, dtype=np.float32)
    return StudentModel(config, E, W, b)


# ---------------------------------------------------------------------------
# checkpoint IO

_HEADER = struct.Struct("<4sI")
_CONFIG = struct.Struct("<IIQIIQ")


def save_model(model: StudentModel, path) -> None:
    cfg = model.config
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MODEL_MAGIC, MODEL_VERSION))
        fh.write(_CONFIG.pack(
            cfg.ngram_min, cfg.ngram_max, cfg.buckets,
            cfg.hidden_dim, cfg.out_dim, cfg.hash_seed,
        ))
        fh.write(model.E.tobytes())
        fh.write(model.W.tobytes())
        fh.write(model.b.tobytes())


def load_model(path) -> StudentModel:
    with open(path, "rb") as fh:
        data = fh.read()
    view = memoryview(data)
    offset = 0

    def take(nbytes: int, what: str) -> memoryview:
        nonlocal offset
        if offset + nbytes > len(view):
            raise StoreFormatError(f"{path}: truncated file while reading {what}")
        chunk = view[offset:offset + nbytes]
        offset += nbytes
        return chunk

    magic, version = _HEADER.unpack(take(_HEADER.size, "header"))
    if magic != MODEL_MAGIC:
        raise StoreFormatError(f"{path}: bad magic {magic!r}")
    if version != MODEL_VERSION:
        raise StoreFormatError(f"{path}: unsupported version {version}")
    fields = _CONFIG.unpack(take(_CONFIG.size, "config"))
    try:
        config = EncoderConfig(*fields)
    except ValueError as exc:
        raise StoreFormatError(f"{path}: bad config: {exc}") from exc

    def matrix(rows: int, cols: int, what: str) -> np.ndarray:
        raw = take(rows * cols * 4, what)
        return np.frombuffer(raw, dtype="<f4").reshape(rows, cols).copy()

    E = matrix(config.buckets, config.hidden_dim, "embedding table")
    W = matrix(config.out_dim, config.hidden_dim, "projection matrix")
    b = np.frombuffer(take(config.out_dim * 4, "bias"), dtype="<f4").copy()
    if offset != len(view):
        raise StoreFormatError(f"{path}: {len(view) - offset} trailing bytes")
    return StudentModel(config, E, W, b)
