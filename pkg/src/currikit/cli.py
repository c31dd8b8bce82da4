"""Command-line entry point orchestrating the pipeline.

Subcommands: ingest, vocab-train, encode, chunk, score, order, plan,
transfer, inspect, stats.  ``plan`` runs the full pipeline from a TOML config
(flags override file values); every other subcommand reads and writes only
the documented interchange files, so stages compose through the filesystem.
All randomness flows from one 64-bit seed via tagged sub-seed derivation
(rng.derive_seed).  Unknown flags or subcommands exit 2; pipeline failures
exit 1 with a single machine-parsable line naming the stage.

Encoded-stream file (between ``encode`` and ``chunk``): one line per
document, ``doc_id<TAB>space-separated piece ids``; the chunker inserts the
document-separator piece between documents.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__, rng
from .chunker import EncodedStream, chunk_stream, read_shard, write_shard
from .complexity import build_frequency_table, read_scores, score_texts, write_scores
from .config import ConfigError, PipelineConfig, load_config, override
from .corpus import CORPUS_FORMATS, load_corpus
from .ioutil import escape_field, sha256_file
from .scheduler import (
    OrderingMode,
    build_plan,
    inspect_extremes,
    order_chunks,
    read_manifest,
    write_manifest,
)
from .transfer import BODY_ACTION, HEAD_ACTION, read_embeddings, transfer_embeddings, write_embeddings
from .vocab import DOC_SEP_ID, decode, encode_documents, read_vocab, train_unigram, write_vocab

THREADS_ENV = "CURRIKIT_THREADS"


def _env_threads() -> int | None:
    value = os.environ.get(THREADS_ENV)
    if value is None:
        return None
    try:
        return max(1, int(value))
    except ValueError:
        return None


def _default_threads() -> int:
    return _env_threads() or 1


def _add_corpus_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--corpus", nargs="+", required=True, help="input text file(s)")
    p.add_argument("--format", choices=CORPUS_FORMATS, default="plain-lines")


# ---------------------------------------------------------------------------
# subcommand implementations
# ---------------------------------------------------------------------------


def _cmd_ingest(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus, format=args.format)
    with open(args.out, "w", encoding="utf-8", newline="\n") as f:
        for k, doc in enumerate(corpus.documents):
            if k:
                f.write("\n")
            f.write(doc.text + "\n")
    stats = corpus.stats()
    print(f"documents\t{stats.documents}")
    print(f"words\t{stats.words}")
    return 0


def _cmd_stats(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus, format=args.format)
    stats = corpus.stats()
    chars = sum(len(d.text) for d in corpus.documents)
    print(f"documents\t{stats.documents}")
    print(f"words\t{stats.words}")
    print(f"chars\t{chars}")
    return 0


def _cmd_vocab_train(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus, format=args.format)
    model = train_unigram(
        corpus,
        target_size=args.target,
        max_piece_len=args.max_piece_len,
        seed_factor=args.seed_factor,
        keep_ratio=args.keep_ratio,
        em_iters=args.em_iters,
    )
    write_vocab(model, args.out, coverage=args.coverage)
    print(f"vocab\t{args.out}\tsize\t{model.size}")
    return 0


def _cmd_encode(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus, format=args.format)
    model = read_vocab(args.vocab)
    with open(args.out, "w", encoding="utf-8", newline="\n") as f:
        for doc_id, ids in encode_documents(corpus, model):
            f.write(f"{doc_id}\t{' '.join(str(i) for i in ids)}\n")
    return 0


def _read_encoded(path: str) -> EncodedStream:
    docs: list[tuple[str, list[int]]] = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            doc_id, _, ids_field = line.rstrip("\n").partition("\t")
            ids = [int(t) for t in ids_field.split()] if ids_field else []
            docs.append((doc_id, ids))
    return EncodedStream.from_documents(docs, DOC_SEP_ID)


def _cmd_chunk(args: argparse.Namespace) -> int:
    stream = _read_encoded(args.encoded)
    result = chunk_stream(stream, args.context_size, tail_policy=args.tail_policy)
    write_shard(args.out, result.chunks)
    print(f"chunks\t{len(result.chunks)}")
    print(f"dropped_tail_pieces\t{result.dropped_tail}")
    return 0


def _cmd_score(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus, format=args.format)
    model = read_vocab(args.vocab)
    chunks = read_shard(args.chunks, decode=lambda ids: decode(ids, model))
    table = build_frequency_table(corpus)
    vectors, scaler, scores = score_texts(
        [c.surface_text for c in chunks], table, threads=args.threads
    )
    write_scores(args.out, [c.chunk_id for c in chunks], vectors, scaler, scores)
    print(f"scored\t{len(chunks)}")
    return 0


def _cmd_order(args: argparse.Namespace) -> int:
    rows = read_scores(args.scores)
    mode = OrderingMode.parse(args.mode)
    ordered = order_chunks(rows, mode, seed=rng.derive_seed(args.seed, "order:cli"))
    with open(args.out, "w", encoding="utf-8", newline="\n") as f:
        for chunk_id in ordered:
            f.write(chunk_id + "\n")
    return 0


def _cmd_plan(args: argparse.Namespace) -> int:
    config = load_config(args.config) if args.config else PipelineConfig()
    config = override(
        config,
        corpus_paths=tuple(args.corpus) if args.corpus else None,
        corpus_format=args.format,
        ordering_mode=args.mode,
        vocab_target=args.vocab_target,
        seed=args.seed,
        output_dir=args.out,
        threads=args.threads if args.threads is not None else _env_threads(),
    )
    if not config.corpus_paths:
        raise ConfigError("no corpus paths given (config [corpus] paths or --corpus)")
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    corpus = load_corpus(config.corpus_paths, format=config.corpus_format)
    model = train_unigram(corpus, target_size=config.vocab_target)
    vocab_file = out / "vocab.tsv"
    write_vocab(model, str(vocab_file))

    manifest = build_plan(corpus, model, config, vocab_file="vocab.tsv")
    manifest["vocab"]["sha256"] = sha256_file(vocab_file)
    write_manifest(manifest, str(out / "manifest.json"))
    print(f"manifest\t{out / 'manifest.json'}")
    return 0


def _cmd_transfer(args: argparse.Namespace) -> int:
    char_emb = read_embeddings(args.char_emb)
    target = read_vocab(args.vocab)
    matrix, report = transfer_embeddings(char_emb, target, seed=args.seed)
    write_embeddings(matrix, args.out)
    if args.manifest:
        manifest = read_manifest(args.manifest)
        manifest["embedding_transfer"] = {
            "body": BODY_ACTION,
            "head": HEAD_ACTION,
            "embedding_file": args.out,
            "copied": report.copied,
            "summed": report.summed,
            "fallback": report.fallback,
        }
        write_manifest(manifest, args.manifest)
    print(f"copied\t{report.copied}")
    print(f"summed\t{report.summed}")
    print(f"fallback\t{report.fallback}")
    print(f"head\t{report.head_action}")
    return 0


def _cmd_inspect(args: argparse.Namespace) -> int:
    model = read_vocab(args.vocab)
    chunks = read_shard(args.chunks, decode=lambda ids: decode(ids, model))
    by_id = {c.chunk_id: c for c in chunks}
    rows = read_scores(args.scores)
    scored = [
        (chunk_id, value, by_id[chunk_id].surface_text)
        for chunk_id, value in rows
        if chunk_id in by_id
    ]
    report = inspect_extremes(scored, k=args.k)
    for bucket, samples in (
        ("lowest", report.lowest),
        ("middle", report.middle),
        ("highest", report.highest),
    ):
        for chunk_id, value, text in samples:
            print(f"{bucket}\t{chunk_id}\t{value:.9g}\t{escape_field(text)}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="currikit",
        description="curriculum corpus preparation: chunk, score, order, shard",
    )
    parser.add_argument("--version", action="version", version=f"currikit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="normalize raw text into canonical framing")
    _add_corpus_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("stats", help="corpus document/word/char counts")
    _add_corpus_args(p)
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("vocab-train", help="train the unigram subword vocabulary")
    _add_corpus_args(p)
    p.add_argument("--target", type=int, default=40000)
    p.add_argument("--out", required=True)
    p.add_argument("--max-piece-len", type=int, default=16)
    p.add_argument("--seed-factor", type=int, default=4)
    p.add_argument("--keep-ratio", type=float, default=0.75)
    p.add_argument("--em-iters", type=int, default=2)
    p.add_argument("--coverage", type=float, default=0.9999)
    p.set_defaults(func=_cmd_vocab_train)

    p = sub.add_parser("encode", help="encode documents to piece ids")
    _add_corpus_args(p)
    p.add_argument("--vocab", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_encode)

    p = sub.add_parser("chunk", help="cut the encoded stream into n-token chunks")
    p.add_argument("--encoded", required=True)
    p.add_argument("--context-size", type=int, required=True)
    p.add_argument("--tail-policy", choices=("drop", "keep-short"), default="drop")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_chunk)

    p = sub.add_parser("score", help="six-feature complexity scores per chunk")
    _add_corpus_args(p)
    p.add_argument("--chunks", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--threads", type=int, default=_default_threads())
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("order", help="order chunks by complexity policy")
    p.add_argument("--scores", required=True)
    p.add_argument("--mode", default="curriculum")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_order)

    p = sub.add_parser("plan", help="full pipeline: manifest + phased shards")
    p.add_argument("--config", help="TOML config file; flags override")
    p.add_argument("--corpus", nargs="+")
    p.add_argument("--format", choices=CORPUS_FORMATS)
    p.add_argument("--mode")
    p.add_argument("--vocab-target", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--threads", type=int)
    p.set_defaults(func=_cmd_plan)

    p = sub.add_parser("transfer", help="character-to-subword embedding transfer")
    p.add_argument("--char-emb", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--manifest", help="append the transfer record to this manifest")
    p.set_defaults(func=_cmd_transfer)

    p = sub.add_parser("inspect", help="lowest/middle/highest complexity samples")
    p.add_argument("--scores", required=True)
    p.add_argument("--chunks", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("-k", type=int, default=3)
    p.set_defaults(func=_cmd_inspect)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - single-line machine-parsable error
        message = str(exc).replace("\n", " ")
        print(f"currikit: error stage={args.command}: {message}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
