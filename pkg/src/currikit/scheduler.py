"""Curriculum orderings, phase partitioning, and the training plan builder.

Orderings: curriculum sorts chunks by ascending complexity (stable, ties by
original position); reversed-curriculum is the exact reverse of that
permutation; no-curriculum is a seeded Fisher-Yates shuffle.  Phase cuts are
ceil(fraction x N) computed in exact rational arithmetic, giving nested
unlocked sets per stage.  build_plan runs encode -> chunk -> score -> order ->
partition for every context stage and writes shards plus a JSON manifest that
embeds the fully-resolved configuration, so a manifest alone reproduces the
run.  Identical inputs and seed give byte-identical artifacts.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import rng
from .chunker import ContextSize, EncodedStream, TextChunk, chunk_stream, write_shard
from .complexity import build_frequency_table, score_texts, write_scores
from .config import ConfigError, PipelineConfig, format_fraction, validate_fractions
from .corpus import Corpus
from .ioutil import sha256_file
from .vocab import DOC_SEP_ID, UnigramModel, decode, encode_documents

MANIFEST_FORMAT = "currikit-manifest"
MANIFEST_VERSION = 1


class OrderingMode(Enum):
    CURRICULUM = "curriculum"
    NO_CURRICULUM = "none"
    REVERSED_CURRICULUM = "reversed"

    @classmethod
    def parse(cls, name: str) -> "OrderingMode":
        normalized = name.strip().lower().replace("_", "-")
        aliases = {
            "curriculum": cls.CURRICULUM,
            "none": cls.NO_CURRICULUM,
            "no-curriculum": cls.NO_CURRICULUM,
            "reversed": cls.REVERSED_CURRICULUM,
            "reversed-curriculum": cls.REVERSED_CURRICULUM,
        }
        try:
            return aliases[normalized]
        except KeyError:
            raise ConfigError(f"unknown ordering mode {name!r}") from None


def order_chunks(
    scores: Sequence[tuple[str, float]], mode: OrderingMode, seed: int = 0
) -> list[str]:
    """Permutation of chunk ids under the given ordering policy."""
    ids = [chunk_id for chunk_id, _ in scores]
    if mode is OrderingMode.NO_CURRICULUM:
        return rng.shuffled(ids, seed)
    order = sorted(range(len(scores)), key=lambda k: (scores[k][1], k))
    curriculum = [ids[k] for k in order]
    if mode is OrderingMode.CURRICULUM:
        return curriculum
    return curriculum[::-1]


def phase_partition(total: int, fractions: Sequence[Fraction]) -> list[int]:
    """Cumulative cut indices ceil(fraction x total), in exact arithmetic."""
    if total < 0:
        raise ValueError("chunk count must be non-negative")
    validate_fractions(tuple(fractions))
    return [math.ceil(Fraction(f) * total) for f in fractions]


@dataclass(frozen=True)
class ExtremesReport:
    lowest: list[tuple[str, float, str]]
    middle: list[tuple[str, float, str]]
    highest: list[tuple[str, float, str]]
    truncated: bool


def inspect_extremes(
    scored_chunks: Sequence[tuple[str, float, str]], k: int
) -> ExtremesReport:
    """k lowest-, middle-, and highest-scoring chunks for qualitative audit."""
    if k < 1:
        raise ValueError("k must be >= 1")
    n = len(scored_chunks)
    truncated = k > n
    if truncated:
        warnings.warn(f"requested {k} samples per bucket but only {n} chunks exist")
        k = n
    order = sorted(range(n), key=lambda i: (scored_chunks[i][1], i))
    ranked = [scored_chunks[i] for i in order]
    mid_start = (n - k) // 2
    return ExtremesReport(
        lowest=ranked[:k],
        middle=ranked[mid_start : mid_start + k],
        highest=ranked[n - k :],
        truncated=truncated,
    )


# ---------------------------------------------------------------------------
# plan building
# ---------------------------------------------------------------------------


def plan_block(config: PipelineConfig) -> dict:
    """The schedule portion of the manifest (golden-comparable)."""
    return {
        "mode": config.ordering_mode,
        "seed": config.seed,
        "phase_fractions": [format_fraction(f) for f in config.phase_fractions],
        "stages": [
            {"context_size": n, "epochs_per_phase": e}
            for n, e in zip(config.context_stages, config.stage_epochs)
        ],
        "vocab_target": config.vocab_target,
        "hyperparameters": config.hyperparameters.as_dict(),
    }


def build_plan(
    corpus: Corpus,
    model: UnigramModel,
    config: PipelineConfig,
    vocab_file: str | None = None,
) -> dict:
    """Run the full staged pipeline and write shards plus manifest.

    Returns the manifest dictionary; artifacts land under config.output_dir.
    """
    config.validate()
    mode = OrderingMode.parse(config.ordering_mode)
    out = Path(config.output_dir)
    shard_dir = out / "shards"
    shard_dir.mkdir(parents=True, exist_ok=True)

    table = build_frequency_table(corpus)
    stream = EncodedStream.from_documents(encode_documents(corpus, model), DOC_SEP_ID)

    stage_entries = []
    for stage_idx, (n, epochs) in enumerate(zip(config.context_stages, config.stage_epochs)):
        n = ContextSize(n)
        result = chunk_stream(
            stream, n, tail_policy=config.tail_policy, decode=lambda ids: decode(ids, model)
        )
        chunks = result.chunks
        chunk_ids = [c.chunk_id for c in chunks]
        vectors, scaler, scores = score_texts(
            [c.surface_text for c in chunks], table, threads=config.threads
        )
        score_file = out / f"scores-ctx{n}.tsv"
        write_scores(str(score_file), chunk_ids, vectors, scaler, scores)

        ordered_ids = order_chunks(
            list(zip(chunk_ids, (s.value for s in scores))),
            mode,
            seed=rng.derive_seed(config.seed, f"order:stage{stage_idx}"),
        )
        order_file = out / f"order-ctx{n}.txt"
        order_file.write_text("".join(f"{i}\n" for i in ordered_ids), encoding="utf-8")

        by_id: dict[str, TextChunk] = {c.chunk_id: c for c in chunks}
        ordered_chunks = [by_id[i] for i in ordered_ids]
        cuts = phase_partition(len(chunks), config.phase_fractions)

        phases = []
        shard_infos: list[dict] = []
        prev = 0
        for phase_no, cut in enumerate(cuts, start=1):
            shard_path = shard_dir / f"ctx{n}-phase{phase_no}.tsv"
            count = write_shard(str(shard_path), ordered_chunks[prev:cut])
            shard_infos.append(
                {
                    "file": str(shard_path.relative_to(out)),
                    "chunks": count,
                    "sha256": sha256_file(shard_path),
                }
            )
            phases.append({"phase": phase_no, "cut": cut, "shards": list(shard_infos)})
            prev = cut

        stage_entries.append(
            {
                "context_size": n,
                "epochs_per_phase": epochs,
                "chunks": len(chunks),
                "dropped_tail_pieces": result.dropped_tail,
                "score_file": str(score_file.relative_to(out)),
                "order_file": str(order_file.relative_to(out)),
                "phases": phases,
            }
        )

    manifest = {
        "format": MANIFEST_FORMAT,
        "version": MANIFEST_VERSION,
        "plan": plan_block(config),
        "config": config.echo(),
        "vocab": {
            "file": vocab_file,
            "size": model.size,
        },
        "stages": stage_entries,
    }
    write_manifest(manifest, str(out / "manifest.json"))
    return manifest


def write_manifest(manifest: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(manifest, f, indent=2, ensure_ascii=False)
        f.write("\n")


def read_manifest(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as f:
        manifest = json.load(f)
    if manifest.get("format") != MANIFEST_FORMAT:
        raise ValueError(f"{path}: not a {MANIFEST_FORMAT} file")
    return manifest
