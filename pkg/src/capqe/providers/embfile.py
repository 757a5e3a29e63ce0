"""Precomputed embedding file: id -> float32 vector, little-endian.

Layout:
    magic   4 bytes  b"EMBF"
    dim     uint32 LE
    records, repeated until EOF:
        id_len  uint32 LE
        id      id_len bytes of UTF-8
        vector  dim * float32 LE

Lets image embeddings be produced offline by any model and read back
bit-exactly, so the pipeline never decodes pixels.
"""

from __future__ import annotations

import struct
from pathlib import Path

from ..errors import CorpusFormatError, ProviderError
from ..scoring import EmbeddingVector
from .base import ProviderConfig, require_non_empty

MAGIC = b"EMBF"


def write_embedding_file(path: str | Path, dim: int, entries: dict[str, tuple[float, ...]]) -> None:
    with open(path, "wb") as handle:
        handle.write(MAGIC)
        handle.write(struct.pack("<I", dim))
        for key in sorted(entries):
            vector = entries[key]
            if len(vector) != dim:
                raise ValueError(f"entry {key!r}: expected dim {dim}, got {len(vector)}")
            encoded = key.encode("utf-8")
            handle.write(struct.pack("<I", len(encoded)))
            handle.write(encoded)
            handle.write(struct.pack(f"<{dim}f", *vector))


def read_embedding_file(path: str | Path) -> tuple[int, dict[str, tuple[float, ...]]]:
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise CorpusFormatError(f"{path}: not an embedding file (bad magic)")
    (dim,) = struct.unpack_from("<I", data, 4)
    offset = 8
    entries: dict[str, tuple[float, ...]] = {}
    record_size = 4 * dim
    while offset < len(data):
        if offset + 4 > len(data):
            raise CorpusFormatError(f"{path}: truncated record header at byte {offset}")
        (id_len,) = struct.unpack_from("<I", data, offset)
        offset += 4
        if offset + id_len + record_size > len(data):
            raise CorpusFormatError(f"{path}: truncated record at byte {offset}")
        key = data[offset : offset + id_len].decode("utf-8")
        offset += id_len
        entries[key] = struct.unpack_from(f"<{dim}f", data, offset)
        offset += record_size
    return dim, entries


class FileMultimodalEmbedder:
    """Serves image and text vectors by exact id lookup in an embedding file."""

    def __init__(self, config: ProviderConfig):
        if not config.embedding_file:
            raise ProviderError("file backend requires embedding_file")
        self._dim, self._entries = read_embedding_file(config.embedding_file)
        self._path = config.embedding_file

    def _lookup(self, key: str) -> EmbeddingVector:
        try:
            return EmbeddingVector(values=tuple(float(x) for x in self._entries[key]))
        except KeyError:
            raise ProviderError(f"{self._path}: no embedding for id {key!r}") from None

    def embed_multimodal(self, image_refs: list[str], texts: list[str]):
        require_non_empty(image_refs, "embed_multimodal")
        require_non_empty(texts, "embed_multimodal")
        return [self._lookup(r) for r in image_refs], [self._lookup(t) for t in texts]
