"""Six-feature linguistic complexity scoring.

Per chunk we compute type/token ratio, mean and max word rarity, punctuation
density, mean sentence length (words) and mean word length (characters).
Word rarity is 1 minus the min-max-normalized natural-log frequency of the
word over the whole corpus (out-of-vocabulary words score 1).  Features are
min-max scaled over the dataset being ordered and the complexity score is the
arithmetic mean of the six scaled values.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .corpus import Corpus, SurfaceToken, TokenKind, split_sentences, tokenize_surface

FEATURE_NAMES = (
    "ttr",
    "mean_rarity",
    "max_rarity",
    "punct_density",
    "mean_sent_len",
    "mean_word_len",
)


class EmptyCorpusError(ValueError):
    pass


@dataclass(frozen=True)
class FrequencyTable:
    """Lowercased word counts with min/max log-count over the corpus."""

    counts: Mapping[str, int]
    total: int
    log_min: float
    log_max: float


@dataclass(frozen=True)
class FeatureVector:
    ttr: float
    mean_rarity: float
    max_rarity: float
    punct_density: float
    mean_sent_len: float
    mean_word_len: float

    def as_tuple(self) -> tuple[float, float, float, float, float, float]:
        return (
            self.ttr,
            self.mean_rarity,
            self.max_rarity,
            self.punct_density,
            self.mean_sent_len,
            self.mean_word_len,
        )


@dataclass(frozen=True)
class MinMaxScaler:
    mins: tuple[float, ...]
    maxs: tuple[float, ...]

    def transform(self, vector: FeatureVector) -> tuple[float, ...]:
        scaled = []
        for x, lo, hi in zip(vector.as_tuple(), self.mins, self.maxs):
            if hi == lo:
                scaled.append(0.0)
            else:
                s = (x - lo) / (hi - lo)
                scaled.append(min(1.0, max(0.0, s)))
        return tuple(scaled)


@dataclass(frozen=True)
class ComplexityScore:
    value: float


def build_frequency_table(corpus: Corpus) -> FrequencyTable:
    """Count lowercased word tokens over the whole corpus."""
    counts: dict[str, int] = {}
    for doc in corpus.documents:
        for tok in tokenize_surface(doc.text):
            if tok.kind is TokenKind.WORD:
                key = tok.text.lower()
                counts[key] = counts.get(key, 0) + 1
    if not counts:
        raise EmptyCorpusError("corpus contains no word tokens")
    logs = [math.log(c) for c in counts.values()]
    return FrequencyTable(
        counts=counts,
        total=sum(counts.values()),
        log_min=min(logs),
        log_max=max(logs),
    )


def word_rarity(word: str, table: FrequencyTable) -> float:
    """1 - normalized log-frequency; OOV words score 1, uniform tables 0."""
    count = table.counts.get(word.lower())
    if count is None:
        return 1.0
    if table.log_max == table.log_min:
        return 0.0
    return 1.0 - (math.log(count) - table.log_min) / (table.log_max - table.log_min)


def compute_features(
    chunk_tokens: Sequence[SurfaceToken],
    sentences: Sequence[tuple[int, int]],
    table: FrequencyTable,
) -> FeatureVector:
    words = [t for t in chunk_tokens if t.kind is TokenKind.WORD]
    n_words = len(words)
    n_punct = len(chunk_tokens) - n_words
    punct_density = n_punct / (n_words + n_punct) if chunk_tokens else 0.0
    if n_words == 0:
        return FeatureVector(0.0, 0.0, 0.0, punct_density, 0.0, 0.0)
    lowered = [t.text.lower() for t in words]
    rarities = [word_rarity(w, table) for w in lowered]
    return FeatureVector(
        ttr=len(set(lowered)) / n_words,
        mean_rarity=sum(rarities) / n_words,
        max_rarity=max(rarities),
        punct_density=punct_density,
        mean_sent_len=n_words / len(sentences) if sentences else 0.0,
        mean_word_len=sum(t.char_len for t in words) / n_words,
    )


def fit_minmax(vectors: Iterable[FeatureVector]) -> MinMaxScaler:
    mins: list[float] | None = None
    maxs: list[float] | None = None
    for vec in vectors:
        values = vec.as_tuple()
        if mins is None:
            mins = list(values)
            maxs = list(values)
        else:
            assert maxs is not None
            for k, x in enumerate(values):
                if x < mins[k]:
                    mins[k] = x
                if x > maxs[k]:
                    maxs[k] = x
    if mins is None or maxs is None:
        raise ValueError("cannot fit a MinMax scaler on an empty dataset")
    return MinMaxScaler(mins=tuple(mins), maxs=tuple(maxs))


def score(vector: FeatureVector, scaler: MinMaxScaler) -> ComplexityScore:
    scaled = scaler.transform(vector)
    return ComplexityScore(value=sum(scaled) / len(scaled))


# ---------------------------------------------------------------------------
# chunk scoring pipeline
# ---------------------------------------------------------------------------

_WORKER_TABLE: FrequencyTable | None = None


def _features_of_text(text: str, table: FrequencyTable) -> FeatureVector:
    return compute_features(tokenize_surface(text), split_sentences(text), table)


def _init_worker(table: FrequencyTable) -> None:
    global _WORKER_TABLE
    _WORKER_TABLE = table


def _worker_features(text: str) -> FeatureVector:
    assert _WORKER_TABLE is not None
    return _features_of_text(text, _WORKER_TABLE)


def score_texts(
    texts: Sequence[str], table: FrequencyTable, threads: int = 1
) -> tuple[list[FeatureVector], MinMaxScaler, list[ComplexityScore]]:
    """Feature -> fit -> score pipeline over chunk surface texts.

    Results are independent of ``threads``: feature extraction is a pure
    per-text map and the pool reassembles results in input order.
    """
    if threads > 1 and len(texts) > 1:
        with ProcessPoolExecutor(
            max_workers=threads, initializer=_init_worker, initargs=(table,)
        ) as pool:
            vectors = list(pool.map(_worker_features, texts, chunksize=256))
    else:
        vectors = [_features_of_text(t, table) for t in texts]
    scaler = fit_minmax(vectors)
    scores = [score(v, scaler) for v in vectors]
    return vectors, scaler, scores


# ---------------------------------------------------------------------------
# score file: chunk_id, six raw, six scaled, score (reals at 9 significant digits)
# ---------------------------------------------------------------------------


def write_scores(
    path: str,
    chunk_ids: Sequence[str],
    vectors: Sequence[FeatureVector],
    scaler: MinMaxScaler,
    scores: Sequence[ComplexityScore],
) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for chunk_id, vec, sc in zip(chunk_ids, vectors, scores):
            raw = "\t".join(f"{x:.9g}" for x in vec.as_tuple())
            scaled = "\t".join(f"{x:.9g}" for x in scaler.transform(vec))
            f.write(f"{chunk_id}\t{raw}\t{scaled}\t{sc.value:.9g}\n")


def read_scores(path: str) -> list[tuple[str, float]]:
    """Return (chunk_id, score) rows from a score file."""
    rows: list[tuple[str, float]] = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            fields = line.rstrip("\n").split("\t")
            rows.append((fields[0], float(fields[-1])))
    return rows
