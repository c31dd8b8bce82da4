"""Character-to-subword embedding transfer.

Single-character pieces present in the source table keep their rows verbatim;
multi-character pieces are initialized as the left-to-right sum of their
characters' rows (accumulated in double precision, rounded to single once at
the end, so the result is bit-reproducible).  Characters missing from the
source contribute a zero vector and the piece counts toward the fallback
tally.  Specials map source-to-target by name, else they are reinitialized
from a seeded Gaussian (mean 0, std 0.02).  The language-modeling head is
always reinitialized; the transformer body copy is the trainer's job and the
manifest records body: copy, head: reinitialize.

Embedding file format: line 1 is ``vocab_size<TAB>dim``, then one line per
piece: ``piece<TAB>v1 v2 ... v_dim`` with each value printed as the shortest
decimal that round-trips to the stored float32.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ioutil import escape_field, unescape_field
from .rng import derive_seed
from .vocab import UnigramModel

HEAD_ACTION = "reinitialize"
BODY_ACTION = "copy"
_SPECIAL_INIT_STD = 0.02


class EmbeddingFormatError(ValueError):
    def __init__(self, path: str, lineno: int, reason: str) -> None:
        super().__init__(f"{path}:{lineno}: {reason}")
        self.path = path
        self.lineno = lineno


@dataclass
class EmbeddingMatrix:
    pieces: list[str]
    rows: np.ndarray  # float32, shape (len(pieces), dim)

    def __post_init__(self) -> None:
        self.rows = np.asarray(self.rows, dtype=np.float32)
        if self.rows.ndim != 2:
            raise ValueError("embedding rows must be a 2-D array")
        if self.rows.shape[0] != len(self.pieces):
            raise ValueError(
                f"row count {self.rows.shape[0]} does not match vocabulary size {len(self.pieces)}"
            )
        if self.rows.shape[1] < 1:
            raise ValueError("embedding dimension must be positive")
        if not np.isfinite(self.rows).all():
            raise ValueError("embedding rows must be finite")

    @property
    def dim(self) -> int:
        return int(self.rows.shape[1])


@dataclass(frozen=True)
class TransferReport:
    copied: int
    summed: int
    fallback: int
    head_action: str = HEAD_ACTION


def transfer_embeddings(
    char_emb: EmbeddingMatrix,
    target_vocab: UnigramModel,
    seed: int = 0,
) -> tuple[EmbeddingMatrix, TransferReport]:
    """Build the target-vocabulary embedding table from character embeddings."""
    if target_vocab.size == 0 or not target_vocab.pieces:
        raise ValueError("target vocabulary is empty")
    dim = char_emb.dim
    source_index = {piece: k for k, piece in enumerate(char_emb.pieces)}
    source64 = char_emb.rows.astype(np.float64)
    gaussian = np.random.default_rng(derive_seed(seed, "transfer-specials"))

    target_pieces = list(target_vocab.specials) + [p for p, _ in target_vocab.pieces]
    out = np.zeros((len(target_pieces), dim), dtype=np.float32)
    copied = summed = fallback = 0
    special_names = set(target_vocab.specials)

    for row, piece in enumerate(target_pieces):
        if piece in special_names:
            k = source_index.get(piece)
            if k is not None:
                out[row] = char_emb.rows[k]
            else:
                out[row] = gaussian.normal(0.0, _SPECIAL_INIT_STD, dim).astype(np.float32)
            copied += 1
        elif len(piece) == 1 and piece in source_index:
            out[row] = char_emb.rows[source_index[piece]]
            copied += 1
        else:
            acc = np.zeros(dim, dtype=np.float64)
            missing = False
            for ch in piece:
                k = source_index.get(ch)
                if k is None:
                    missing = True
                else:
                    acc += source64[k]
            out[row] = acc.astype(np.float32)
            summed += 1
            if missing:
                fallback += 1

    report = TransferReport(copied=copied, summed=summed, fallback=fallback)
    return EmbeddingMatrix(pieces=target_pieces, rows=out), report


# ---------------------------------------------------------------------------
# embedding file
# ---------------------------------------------------------------------------


def write_embeddings(matrix: EmbeddingMatrix, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"{len(matrix.pieces)}\t{matrix.dim}\n")
        for piece, row in zip(matrix.pieces, matrix.rows):
            values = " ".join(str(v) for v in row)
            f.write(f"{escape_field(piece)}\t{values}\n")


def read_embeddings(path: str) -> EmbeddingMatrix:
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline()
        if not header:
            raise EmbeddingFormatError(path, 1, "missing header")
        parts = header.rstrip("\n").split("\t")
        if len(parts) != 2:
            raise EmbeddingFormatError(path, 1, "header must be 'vocab_size<TAB>dim'")
        try:
            vocab_size, dim = int(parts[0]), int(parts[1])
        except ValueError:
            raise EmbeddingFormatError(path, 1, "header must hold two integers") from None
        if vocab_size < 0 or dim < 1:
            raise EmbeddingFormatError(path, 1, f"invalid header sizes {vocab_size}x{dim}")

        pieces: list[str] = []
        rows = np.empty((vocab_size, dim), dtype=np.float32)
        lineno = 1
        for k in range(vocab_size):
            line = f.readline()
            lineno += 1
            if not line:
                raise EmbeddingFormatError(
                    path, lineno, f"expected {vocab_size} rows, file ended after {k}"
                )
            fields = line.rstrip("\n").split("\t")
            if len(fields) != 2:
                raise EmbeddingFormatError(path, lineno, "expected 'piece<TAB>values'")
            values = fields[1].split(" ")
            if len(values) != dim:
                raise EmbeddingFormatError(
                    path, lineno, f"expected {dim} values, found {len(values)}"
                )
            try:
                row = [np.float32(v) for v in values]
            except ValueError:
                raise EmbeddingFormatError(path, lineno, "unparsable value") from None
            if not all(math.isfinite(float(v)) for v in row):
                raise EmbeddingFormatError(path, lineno, "non-finite value")
            pieces.append(unescape_field(fields[0]))
            rows[k] = row
        if f.readline():
            raise EmbeddingFormatError(
                path, lineno + 1, f"trailing data after {vocab_size} rows"
            )
    return EmbeddingMatrix(pieces=pieces, rows=rows)
