"""Exact cosine top-k retrieval over a row-normalized embedding matrix.

No approximation: every query is a full scan, which at the corpus sizes
this toolkit targets (thousands to tens of thousands of rows) is both exact
and fast. Rows are L2-normalized once at build time; queries are normalized
per call, so scores are plain dot products of unit vectors.

Persistence reuses the embedding-store binary format with version 2 and a
one-byte "normalized" flag; version-1 store files load too (their rows get
normalized on the way in).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SearchError
from .teacher import deserialize_semb, serialize_semb

SCORE_SLACK = 1e-5
NORM_TOLERANCE = 1e-4


@dataclass
class Hit:
    id: str
    score: float
    rank: int


@dataclass
class VectorIndex:
    """Unit-row matrix with aligned ids; immutable after construction."""

    dim: int
    ids: list[str]
    matrix: np.ndarray  # count x dim float32, rows unit-norm
    norms_ok: bool = True
    _matrix64: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.dim < 1:
            raise SearchError(f"dim must be positive, got {self.dim}")
        if self.matrix.shape != (len(self.ids), self.dim):
            raise SearchError(
                f"matrix shape {self.matrix.shape} does not match "
                f"{len(self.ids)} ids x dim {self.dim}"
            )
        if self.matrix.dtype != np.float32:
            raise SearchError(f"matrix must be float32, got {self.matrix.dtype}")
        if len(set(self.ids)) != len(self.ids):
            raise SearchError("duplicate ids in index")
        if len(self.ids):
            norms = np.linalg.norm(self.matrix.astype(np.float64), axis=1)
            worst = float(np.abs(norms - 1.0).max())
            if worst > NORM_TOLERANCE:
                raise SearchError(f"index rows not unit-norm (worst deviation {worst:g})")

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def matrix64(self) -> np.ndarray:
        """Lazily cached float64 view of the matrix, for fast exact scoring."""
        if self._matrix64 is None:
            object.__setattr__(self, "_matrix64", self.matrix.astype(np.float64))
        return self._matrix64


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """dot(a,b) / (|a||b|), accumulated in 64-bit floats."""
    a64 = np.asarray(a, dtype=np.float64).ravel()
    b64 = np.asarray(b, dtype=np.float64).ravel()
    if a64.shape != b64.shape:
        raise SearchError(f"dimension mismatch: {a64.shape[0]} vs {b64.shape[0]}")
    norm_a = float(np.sqrt(np.dot(a64, a64)))
    norm_b = float(np.sqrt(np.dot(b64, b64)))
    if norm_a == 0.0 or norm_b == 0.0:
        raise SearchError("cosine of a zero vector is undefined")
    return float(np.dot(a64, b64)) / (norm_a * norm_b)


def build(ids: list[str], vectors: np.ndarray) -> VectorIndex:
    """Normalize rows and attach ids; original row order is preserved."""
    if len(set(ids)) != len(ids):
        raise SearchError("duplicate ids")
    vecs = np.asarray(vectors)
    if vecs.ndim != 2 or vecs.shape[0] != len(ids):
        raise SearchError(
            f"expected {len(ids)} vector rows, got array of shape {vecs.shape}"
        )
    if vecs.shape[0] == 0 or vecs.shape[1] == 0:
        raise SearchError("empty index")
    vecs64 = vecs.astype(np.float64)
    if not np.isfinite(vecs64).all():
        raise SearchError("non-finite vector components")
    norms = np.linalg.norm(vecs64, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise SearchError(f"zero vector for id {ids[int(zero[0])]!r}")
    matrix = (vecs64 / norms[:, None]).astype(np.float32)
    return VectorIndex(dim=vecs.shape[1], ids=list(ids), matrix=matrix, norms_ok=True)


def top_k(index: VectorIndex, query: np.ndarray, k: int) -> list[Hit]:
    """The min(k, count) highest-cosine rows, exact; ties go to the lower row index."""
    if k < 1:
        raise SearchError(f"k must be >= 1, got {k}")
    q64 = np.asarray(query, dtype=np.float64).ravel()
    if q64.shape[0] != index.dim:
        raise SearchError(f"query dim {q64.shape[0]} != index dim {index.dim}")
    norm = float(np.sqrt(np.dot(q64, q64)))
    if norm == 0.0:
        raise SearchError("zero query vector")
    # einsum (not BLAS gemv) so that bitwise-identical rows receive
    # bitwise-identical scores regardless of their position in the matrix;
    # only then does the stable argsort give the documented tie order
    scores = np.einsum("ij,j->i", index.matrix64, q64 / norm)
    order = np.argsort(-scores, kind="stable")[:min(k, len(index))]
    return [
        Hit(id=index.ids[int(row)], score=float(scores[row]), rank=rank)
        for rank, row in enumerate(order)
    ]


def save_index(index: VectorIndex, path) -> None:
    data = serialize_semb(index.dim, index.ids, index.matrix, version=2, flag=1)
    with open(path, "wb") as fh:
        fh.write(data)


def load_index(path) -> VectorIndex:
    """Load an index file; a plain version-1 store is accepted and normalized."""
    with open(path, "rb") as fh:
        data = fh.read()
    version, flag, dim, ids, vectors = deserialize_semb(data, str(path))
    if version == 2 and flag == 1:
        return VectorIndex(dim=dim, ids=ids, matrix=vectors, norms_ok=True)
    return build(ids, vectors)
