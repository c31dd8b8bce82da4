"""Fixed-length chunking of the encoded corpus stream.

The stream is the concatenation of all encoded documents with a
document-separator piece between consecutive documents.  Chunks are cut in
stream order; the trailing partial chunk is dropped (and counted) under the
default ``drop`` tail policy or kept under ``keep-short``.  Shuffling is
Fisher-Yates over SplitMix64 (see rng.py) so shards reproduce byte-identically
everywhere.

Shard file format (TSV, UTF-8, one record per line):

    chunk_id <TAB> length <TAB> space-separated piece ids <TAB> doc_id <TAB> token_offset

``length`` is the actual piece count of the record (equal to the context size
except for a kept short tail).  Surface text is not stored; it reconstructs
through the vocabulary file.
"""

from __future__ import annotations

import warnings
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from . import rng

TAIL_DROP = "drop"
TAIL_KEEP_SHORT = "keep-short"
TAIL_POLICIES = (TAIL_DROP, TAIL_KEEP_SHORT)

DEFAULT_CONTEXT_SIZES = (16, 32, 64, 128, 256)


class ContextSize(int):
    """A positive token count; values outside the default set warn."""

    def __new__(cls, n: int) -> "ContextSize":
        value = int(n)
        if value < 1:
            raise ValueError(f"context size must be positive, got {value}")
        if value not in DEFAULT_CONTEXT_SIZES:
            warnings.warn(
                f"context size {value} is outside the default set {DEFAULT_CONTEXT_SIZES}",
                stacklevel=2,
            )
        return super().__new__(cls, value)


@dataclass(frozen=True)
class TextChunk:
    chunk_id: str
    piece_ids: tuple[int, ...]
    surface_text: str
    provenance: tuple[str, int]  # (document id, token offset of first piece)


@dataclass
class EncodedStream:
    """Piece ids for the whole corpus plus per-document span bookkeeping."""

    piece_ids: list[int]
    doc_ids: list[str] = field(default_factory=list)
    doc_starts: list[int] = field(default_factory=list)

    @classmethod
    def from_documents(
        cls, encoded_docs: Iterable[tuple[str, Sequence[int]]], separator_id: int
    ) -> "EncodedStream":
        pieces: list[int] = []
        doc_ids: list[str] = []
        doc_starts: list[int] = []
        first = True
        for doc_id, ids in encoded_docs:
            if not first:
                pieces.append(separator_id)
            first = False
            doc_ids.append(doc_id)
            doc_starts.append(len(pieces))
            pieces.extend(ids)
        return cls(piece_ids=pieces, doc_ids=doc_ids, doc_starts=doc_starts)

    def provenance_at(self, index: int) -> tuple[str, int]:
        if not self.doc_ids:
            return ("", index)
        k = bisect_right(self.doc_starts, index) - 1
        return (self.doc_ids[k], index - self.doc_starts[k])


@dataclass(frozen=True)
class ChunkingResult:
    chunks: list[TextChunk]
    dropped_tail: int  # pieces discarded under the drop policy


def chunk_stream(
    pieces: EncodedStream | Sequence[int],
    n: int,
    tail_policy: str = TAIL_DROP,
    decode: Callable[[Sequence[int]], str] | None = None,
) -> ChunkingResult:
    """Cut the stream into n-piece chunks in order; see module docstring."""
    if n < 1:
        raise ValueError(f"context size must be positive, got {n}")
    if tail_policy not in TAIL_POLICIES:
        raise ValueError(f"unknown tail policy {tail_policy!r}; expected one of {TAIL_POLICIES}")
    if isinstance(pieces, EncodedStream):
        stream = pieces
        ids = pieces.piece_ids
    else:
        stream = None
        ids = list(pieces)

    chunks: list[TextChunk] = []
    total = len(ids)
    whole = total // n
    for k in range(whole):
        start = k * n
        chunk_ids = tuple(ids[start : start + n])
        chunks.append(
            TextChunk(
                chunk_id=f"s{n}-{k:08d}",
                piece_ids=chunk_ids,
                surface_text=decode(chunk_ids) if decode else "",
                provenance=stream.provenance_at(start) if stream else ("", start),
            )
        )
    tail = total - whole * n
    if tail and tail_policy == TAIL_KEEP_SHORT:
        start = whole * n
        chunk_ids = tuple(ids[start:])
        chunks.append(
            TextChunk(
                chunk_id=f"s{n}-{whole:08d}",
                piece_ids=chunk_ids,
                surface_text=decode(chunk_ids) if decode else "",
                provenance=stream.provenance_at(start) if stream else ("", start),
            )
        )
        tail = 0
    return ChunkingResult(chunks=chunks, dropped_tail=tail)


def shuffle_chunks(chunks: Sequence[TextChunk], seed: int) -> list[TextChunk]:
    """Deterministic Fisher-Yates permutation of the chunk list."""
    return rng.shuffled(chunks, seed)


# ---------------------------------------------------------------------------
# shard files
# ---------------------------------------------------------------------------


def write_shard(path: str, chunks: Iterable[TextChunk]) -> int:
    """Write chunks as shard records; returns the record count."""
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for chunk in chunks:
            ids = " ".join(str(i) for i in chunk.piece_ids)
            doc_id, offset = chunk.provenance
            f.write(f"{chunk.chunk_id}\t{len(chunk.piece_ids)}\t{ids}\t{doc_id}\t{offset}\n")
            count += 1
    return count


def read_shard(
    path: str, decode: Callable[[Sequence[int]], str] | None = None
) -> list[TextChunk]:
    chunks: list[TextChunk] = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            fields = line.rstrip("\n").split("\t")
            if len(fields) != 5:
                raise ValueError(f"{path}:{lineno}: expected 5 tab-separated fields")
            chunk_id, length, ids_field, doc_id, offset = fields
            piece_ids = tuple(int(t) for t in ids_field.split()) if ids_field else ()
            if int(length) != len(piece_ids):
                raise ValueError(f"{path}:{lineno}: length field does not match piece count")
            chunks.append(
                TextChunk(
                    chunk_id=chunk_id,
                    piece_ids=piece_ids,
                    surface_text=decode(piece_ids) if decode else "",
                    provenance=(doc_id, int(offset)),
                )
            )
    return chunks
