"""Readers for the currikit interchange files the trainer consumes.

The trainer touches only four artifacts: the manifest JSON, shard TSV files,
the vocabulary file, and (optionally) an embedding file.  It never reads the
raw corpus.  Shard digests are verified against the manifest before any
training step runs.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SPECIALS = ("<pad>", "<unk>", "<mask>", "<doc>")
PAD_ID, UNK_ID, MASK_ID, DOC_SEP_ID = range(4)


class DigestMismatchError(RuntimeError):
    pass


@dataclass(frozen=True)
class PhaseData:
    phase: int
    chunk_ids: list[str]
    chunks: np.ndarray  # int64, shape (num_chunks, context_size), pad-filled


@dataclass(frozen=True)
class StageData:
    context_size: int
    epochs_per_phase: int
    phases: list[PhaseData]


@dataclass(frozen=True)
class Plan:
    manifest: dict
    stages: list[StageData]
    vocab_size: int
    hyperparameters: dict


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def read_vocab_size(path: str | Path) -> int:
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().rstrip("\n").split("\t")
    if not header or header[0] != "#currikit-vocab":
        raise ValueError(f"{path}: not a currikit vocabulary file")
    return int(header[1].removeprefix("size="))


def _unescape(text: str) -> str:
    if "\\" not in text:
        return text
    out = []
    i = 0
    while i < len(text):
        if text[i] == "\\" and i + 1 < len(text):
            nxt = text[i + 1]
            mapped = {"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}.get(nxt)
            if mapped is not None:
                out.append(mapped)
                i += 2
                continue
        out.append(text[i])
        i += 1
    return "".join(out)


def read_embedding_file(path: str | Path) -> tuple[list[str], np.ndarray]:
    """Embedding file: header 'vocab_size<TAB>dim', rows 'piece<TAB>v1 v2 ...'."""
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().rstrip("\n").split("\t")
        vocab_size, dim = int(header[0]), int(header[1])
        pieces: list[str] = []
        rows = np.empty((vocab_size, dim), dtype=np.float32)
        for k in range(vocab_size):
            fields = f.readline().rstrip("\n").split("\t")
            pieces.append(_unescape(fields[0]))
            rows[k] = np.array(fields[1].split(" "), dtype=np.float32)
    return pieces, rows


def _read_shard_records(path: Path) -> list[tuple[str, list[int]]]:
    records: list[tuple[str, list[int]]] = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            chunk_id, _length, ids_field, _doc, _off = line.rstrip("\n").split("\t")
            ids = [int(t) for t in ids_field.split()] if ids_field else []
            records.append((chunk_id, ids))
    return records


def load_plan(manifest_path: str | Path, verify_digests: bool = True) -> Plan:
    manifest_path = Path(manifest_path)
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    if manifest.get("format") != "currikit-manifest":
        raise ValueError(f"{manifest_path}: not a currikit manifest")
    base = manifest_path.parent

    stages: list[StageData] = []
    for stage in manifest["stages"]:
        n = int(stage["context_size"])
        phases: list[PhaseData] = []
        for phase in stage["phases"]:
            ids: list[str] = []
            rows: list[list[int]] = []
            for shard in phase["shards"]:
                shard_path = base / shard["file"]
                if verify_digests and _sha256(shard_path) != shard["sha256"]:
                    raise DigestMismatchError(
                        f"{shard_path}: digest does not match the manifest"
                    )
                for chunk_id, pieces in _read_shard_records(shard_path):
                    ids.append(chunk_id)
                    if len(pieces) < n:  # kept short tail: right-pad
                        pieces = pieces + [PAD_ID] * (n - len(pieces))
                    rows.append(pieces[:n])
            data = (
                np.array(rows, dtype=np.int64)
                if rows
                else np.empty((0, n), dtype=np.int64)
            )
            phases.append(PhaseData(phase=int(phase["phase"]), chunk_ids=ids, chunks=data))
        stages.append(
            StageData(
                context_size=n,
                epochs_per_phase=int(stage["epochs_per_phase"]),
                phases=phases,
            )
        )

    vocab_file = manifest.get("vocab", {}).get("file")
    vocab_size = read_vocab_size(base / vocab_file) if vocab_file else 0
    return Plan(
        manifest=manifest,
        stages=stages,
        vocab_size=vocab_size,
        hyperparameters=dict(manifest["plan"]["hyperparameters"]),
    )
