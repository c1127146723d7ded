"""Standalone SEMB embedding-store exporter.

Writes the binary id -> float32-vector store format ("SEMB" version 1)
consumed by the intertext toolkit, from either a real sentence-encoder
model or the deterministic hash-based pseudo teacher. The exporter shares
no code with the toolkit; it interoperates purely through the frozen file
format, so its pseudo output must be byte-identical to the toolkit's own.

Embeddings are written exactly as the model produced them, in input order.
The only optional post-processing is L2 normalization, off by default.
"""

from .embed import export_pseudo, export_real, pseudo_vector
from .errors import ExportError
from .formats import read_sentences, write_store

__all__ = [
    "ExportError",
    "export_pseudo",
    "export_real",
    "pseudo_vector",
    "read_sentences",
    "write_store",
]
