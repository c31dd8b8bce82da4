"""Unigram subword vocabulary: seeding, EM training, pruning, Viterbi coding.

Pretokenization is the metaspace convention: every space becomes the boundary
marker U+2581 and the marked text splits into fragments that pieces never
span.  Training runs EM over the segmentation lattice of each unique fragment
(weighted by its corpus count): the E-step computes expected piece counts by
forward-backward in log space, the M-step renormalizes piece probabilities
from those counts, and the returned log-likelihood is the sum of per-fragment
log partition values under the input model, so it is non-decreasing across
successive steps.  Pruning removes the lowest-utility multi-character pieces
(utility = expected count x |log-probability|) until the target size is
reached; single-character pieces and specials are never removed.

Viterbi encoding returns the maximum-log-probability segmentation with a
deterministic tie-break: fewer pieces first, then the lexicographically
earliest piece sequence.  Characters absent from the model consume the
unknown piece at a fixed penalty log-probability.

Vocabulary file format: a header line ``#currikit-vocab<TAB>size=N<TAB>coverage=C``
followed by one ``piece<TAB>logprob`` line per entry, specials first.
Special log-probabilities are written as 0 and sit outside the normalized
probability mass.  Piece strings are escaped per ioutil.escape_field.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .corpus import Corpus
from .ioutil import escape_field, unescape_field

BOUNDARY = "▁"

PAD, UNK, MASK, DOC_SEP = "<pad>", "<unk>", "<mask>", "<doc>"
SPECIALS = (PAD, UNK, MASK, DOC_SEP)
PAD_ID, UNK_ID, MASK_ID, DOC_SEP_ID = range(4)

UNK_LOGPROB = -100.0
# dead pieces keep a finite logprob whose exp underflows to exactly 0.0
_DEAD_LOGPROB = -1000.0

Segmentation = list[int]


class CoverageError(ValueError):
    def __init__(self, char: str) -> None:
        super().__init__(f"character {char!r} is not covered by the model")
        self.char = char


@dataclass
class UnigramModel:
    """Piece inventory with log-probabilities; ids 0..3 are the specials."""

    pieces: list[tuple[str, float]]
    specials: tuple[str, ...] = SPECIALS
    _ids: dict[str, int] = field(init=False, repr=False)
    _logps: list[float] = field(init=False, repr=False)
    _chars: frozenset[str] = field(init=False, repr=False)
    _max_len: int = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._ids = {}
        for idx, (piece, _) in enumerate(self.pieces):
            if piece in self._ids:
                raise ValueError(f"duplicate piece {piece!r}")
            self._ids[piece] = idx + len(self.specials)
        self._logps = [lp for _, lp in self.pieces]
        self._chars = frozenset(p for p, _ in self.pieces if len(p) == 1)
        self._max_len = max((len(p) for p, _ in self.pieces), default=0)

    @property
    def size(self) -> int:
        return len(self.specials) + len(self.pieces)

    @property
    def char_coverage(self) -> frozenset[str]:
        return self._chars

    @property
    def is_char_vocab(self) -> bool:
        return all(len(p) == 1 for p, _ in self.pieces)

    def id_of(self, piece: str) -> int | None:
        return self._ids.get(piece)

    def piece_string(self, piece_id: int) -> str:
        if 0 <= piece_id < len(self.specials):
            return self.specials[piece_id]
        k = piece_id - len(self.specials)
        if 0 <= k < len(self.pieces):
            return self.pieces[k][0]
        raise ValueError(f"invalid piece id {piece_id}")

    def logprob_sum(self) -> float:
        return sum(math.exp(lp) for _, lp in self.pieces)


CharVocab = UnigramModel  # a UnigramModel whose every piece has length 1


# ---------------------------------------------------------------------------
# pretokenization
# ---------------------------------------------------------------------------


_FRAGMENT_RE = re.compile(f"{BOUNDARY}?[^{BOUNDARY}]+|{BOUNDARY}")


def pretokenize(text: str) -> list[str]:
    """Metaspace fragments: spaces become the marker, pieces never span them."""
    return _FRAGMENT_RE.findall(text.replace(" ", BOUNDARY))


def _fragment_counts(corpus: Corpus) -> Counter[str]:
    counts: Counter[str] = Counter()
    for doc in corpus.documents:
        counts.update(pretokenize(doc.text))
    return counts


# ---------------------------------------------------------------------------
# character vocabulary
# ---------------------------------------------------------------------------


def build_char_vocab(corpus: Corpus, coverage: float = 0.9999) -> UnigramModel:
    """Single-character pieces covering ``coverage`` of the character mass."""
    char_counts: Counter[str] = Counter()
    for doc in corpus.documents:
        char_counts.update(doc.text.replace(" ", BOUNDARY))
    if not char_counts:
        raise ValueError("cannot build a character vocabulary from an empty corpus")
    ranked = sorted(char_counts.items(), key=lambda kv: (-kv[1], kv[0]))
    total = sum(char_counts.values())
    kept: list[tuple[str, int]] = []
    covered = 0
    for ch, count in ranked:
        if covered >= coverage * total:
            break
        kept.append((ch, count))
        covered += count
    kept_total = sum(c for _, c in kept)
    pieces = [(ch, math.log(c) - math.log(kept_total)) for ch, c in kept]
    pieces.sort(key=lambda it: (-it[1], it[0]))
    return UnigramModel(pieces=pieces)


# ---------------------------------------------------------------------------
# seeding
# ---------------------------------------------------------------------------


def seed_candidates(
    corpus: Corpus | Mapping[str, int],
    max_piece_len: int = 16,
    seed_size: int = 160000,
) -> UnigramModel:
    """All single characters plus the top frequent substrings (count x length)."""
    counts = corpus if isinstance(corpus, Mapping) else _fragment_counts(corpus)
    if not counts:
        raise ValueError("cannot seed candidates from an empty corpus")
    char_counts: Counter[str] = Counter()
    sub_counts: Counter[str] = Counter()
    for fragment, weight in counts.items():
        for ch in fragment:
            char_counts[ch] += weight
        length = len(fragment)
        for i in range(length):
            upper = min(length, i + max_piece_len)
            for j in range(i + 2, upper + 1):
                sub_counts[fragment[i:j]] += weight
    ranked = sorted(
        sub_counts.items(), key=lambda kv: (-kv[1] * len(kv[0]), kv[0])
    )[:seed_size]

    raw: dict[str, int] = dict(char_counts)
    for piece, count in ranked:
        raw[piece] = count
    log_total = math.log(sum(raw.values()))
    pieces = [(piece, math.log(c) - log_total) for piece, c in raw.items()]
    pieces.sort(key=lambda it: (-it[1], it[0]))
    return UnigramModel(pieces=pieces)


# ---------------------------------------------------------------------------
# EM over the segmentation lattice
# ---------------------------------------------------------------------------

_NEG_INF = float("-inf")


def _logsumexp(values: list[float]) -> float:
    m = max(values)
    if m == _NEG_INF:
        return m
    return m + math.log(sum(math.exp(v - m) for v in values))


def _em_pass(
    model: UnigramModel, counts: Mapping[str, int]
) -> tuple[UnigramModel, float, list[float]]:
    """One E+M step; returns updated model, input-model LL, expected counts."""
    ids = model._ids
    n_special = len(model.specials)
    logps = model._logps
    max_len = model._max_len
    expected = [0.0] * len(model.pieces)
    total_ll = 0.0

    for fragment, weight in counts.items():
        length = len(fragment)
        # edges[(i, j)] are (local piece index, logp)
        edges: list[tuple[int, int, int, float]] = []
        for i in range(length):
            upper = min(length, i + max_len)
            for j in range(i + 1, upper + 1):
                piece_id = ids.get(fragment[i:j])
                if piece_id is not None:
                    local = piece_id - n_special
                    edges.append((i, j, local, logps[local]))
        alpha = [_NEG_INF] * (length + 1)
        alpha[0] = 0.0
        by_end: list[list[tuple[int, float]]] = [[] for _ in range(length + 1)]
        by_start: list[list[tuple[int, int, float]]] = [[] for _ in range(length + 1)]
        for i, j, local, lp in edges:
            by_end[j].append((i, lp))
            by_start[i].append((j, local, lp))
        for j in range(1, length + 1):
            vals = [alpha[i] + lp for i, lp in by_end[j] if alpha[i] != _NEG_INF]
            if vals:
                alpha[j] = _logsumexp(vals)
        log_z = alpha[length]
        if log_z == _NEG_INF:
            # name the character at the first position no path can reach past
            stuck = max(j for j in range(length + 1) if alpha[j] != _NEG_INF)
            raise CoverageError(fragment[stuck])
        beta = [_NEG_INF] * (length + 1)
        beta[length] = 0.0
        for i in range(length - 1, -1, -1):
            vals = [lp + beta[j] for j, _, lp in by_start[i] if beta[j] != _NEG_INF]
            if vals:
                beta[i] = _logsumexp(vals)
        for i, j, local, lp in edges:
            if alpha[i] == _NEG_INF or beta[j] == _NEG_INF:
                continue
            expected[local] += weight * math.exp(alpha[i] + lp + beta[j] - log_z)
        total_ll += weight * log_z

    total_expected = sum(expected)
    new_pieces: list[tuple[str, float]] = []
    log_total = math.log(total_expected)
    for (piece, _), e in zip(model.pieces, expected):
        if e > 0.0:
            new_pieces.append((piece, math.log(e) - log_total))
        else:
            new_pieces.append((piece, _DEAD_LOGPROB))
    return UnigramModel(pieces=new_pieces, specials=model.specials), total_ll, expected


def em_step(
    model: UnigramModel, corpus: Corpus | Mapping[str, int]
) -> tuple[UnigramModel, float]:
    """Run one EM step; the log-likelihood is that of the *input* model."""
    counts = corpus if isinstance(corpus, Mapping) else _fragment_counts(corpus)
    updated, ll, _ = _em_pass(model, counts)
    return updated, ll


# ---------------------------------------------------------------------------
# pruning
# ---------------------------------------------------------------------------


def prune(
    model: UnigramModel,
    corpus: Corpus | Mapping[str, int],
    target_size: int,
    keep_ratio: float = 0.75,
    em_iters: int = 2,
) -> UnigramModel:
    """Alternate EM and utility-based removal until size <= target_size."""
    counts = corpus if isinstance(corpus, Mapping) else _fragment_counts(corpus)
    floor = len(model.specials) + len(model.char_coverage)
    if target_size < floor:
        raise ValueError(
            f"target size {target_size} is below the character floor {floor}"
        )
    if not 0.0 < keep_ratio < 1.0:
        raise ValueError("keep_ratio must be in (0, 1)")

    while model.size > target_size:
        expected: list[float] = []
        for _ in range(max(1, em_iters)):
            model, _, expected = _em_pass(model, counts)
        removable: list[tuple[float, str]] = []
        for (piece, lp), e in zip(model.pieces, expected):
            if len(piece) == 1:
                continue
            removable.append((e * -lp, piece))
        if not removable:
            break
        removable.sort()
        n_remove = min(
            max(1, math.ceil(len(removable) * (1.0 - keep_ratio))),
            model.size - target_size,
            len(removable),
        )
        drop = {piece for _, piece in removable[:n_remove]}
        survivors = [(p, lp) for p, lp in model.pieces if p not in drop]
        log_norm = _logsumexp([lp for _, lp in survivors])
        model = UnigramModel(
            pieces=[(p, lp - log_norm) for p, lp in survivors],
            specials=model.specials,
        )
    return model


def train_unigram(
    corpus: Corpus,
    target_size: int,
    max_piece_len: int = 16,
    seed_factor: int = 4,
    keep_ratio: float = 0.75,
    em_iters: int = 2,
) -> UnigramModel:
    """Seed, EM, prune-to-target, final EM polish, canonical piece order."""
    counts = _fragment_counts(corpus)
    model = seed_candidates(counts, max_piece_len=max_piece_len, seed_size=seed_factor * target_size)
    floor = len(model.specials) + len(model.char_coverage)
    if target_size < floor:
        raise ValueError(
            f"target size {target_size} is below the character floor {floor}"
        )
    for _ in range(max(1, em_iters)):
        model, _, _ = _em_pass(model, counts)
    if model.size > target_size:
        model = prune(model, counts, target_size, keep_ratio=keep_ratio, em_iters=em_iters)
    for _ in range(max(1, em_iters)):
        model, _, _ = _em_pass(model, counts)
    pieces = sorted(model.pieces, key=lambda it: (-it[1], it[0]))
    return UnigramModel(pieces=pieces, specials=model.specials)


# ---------------------------------------------------------------------------
# Viterbi encoding / decoding
# ---------------------------------------------------------------------------


def _viterbi_fragment(fragment: str, model: UnigramModel) -> list[int]:
    """Best segmentation of one fragment, with the declared exact tie-break."""
    ids = model._ids
    n_special = len(model.specials)
    logps = model._logps
    coverage = model._chars
    max_len = max(model._max_len, 1)
    n = len(fragment)

    # fast pass: (neg_logp, piece_count) with backpointers; fall back to the
    # exact lexicographic tie-break only if two candidates tie on both
    neg = [math.inf] * (n + 1)
    cnt = [0] * (n + 1)
    back: list[tuple[int, int] | None] = [None] * (n + 1)  # (prev, piece_id or -1)
    neg[0] = 0.0
    tied = False
    for j in range(1, n + 1):
        best_key: tuple[float, int] | None = None
        best_back: tuple[int, int] | None = None
        lo = max(0, j - max_len)
        for i in range(lo, j):
            if neg[i] == math.inf:
                continue
            piece_id = ids.get(fragment[i:j])
            if piece_id is None:
                continue
            key = (neg[i] - logps[piece_id - n_special], cnt[i] + 1)
            if best_key is None or key < best_key:
                best_key = key
                best_back = (i, piece_id)
            elif key == best_key:
                tied = True
        ch = fragment[j - 1]
        if ch not in coverage and neg[j - 1] != math.inf:
            key = (neg[j - 1] - UNK_LOGPROB, cnt[j - 1] + 1)
            if best_key is None or key < best_key:
                best_key = key
                best_back = (j - 1, -1)
            elif key == best_key:
                tied = True
        if best_key is not None:
            neg[j], cnt[j] = best_key
            back[j] = best_back

    if back[n] is None and n > 0:
        raise CoverageError(fragment[0])
    if not tied:
        out: list[int] = []
        k = n
        while k > 0:
            prev, piece_id = back[k]  # type: ignore[misc]
            out.append(piece_id if piece_id >= 0 else UNK_ID)
            k = prev
        out.reverse()
        return out
    return _viterbi_fragment_exact(fragment, model)


def _viterbi_fragment_exact(fragment: str, model: UnigramModel) -> list[int]:
    ids = model._ids
    n_special = len(model.specials)
    logps = model._logps
    coverage = model._chars
    max_len = max(model._max_len, 1)
    n = len(fragment)
    # state: (neg_logp, count, piece strings, piece ids)
    State = tuple[float, int, tuple[str, ...], tuple[int, ...]]
    best: list[State | None] = [None] * (n + 1)
    best[0] = (0.0, 0, (), ())
    for j in range(1, n + 1):
        candidates: list[State] = []
        lo = max(0, j - max_len)
        for i in range(lo, j):
            prev = best[i]
            if prev is None:
                continue
            piece = fragment[i:j]
            piece_id = ids.get(piece)
            if piece_id is None:
                continue
            lp = logps[piece_id - n_special]
            candidates.append(
                (prev[0] - lp, prev[1] + 1, prev[2] + (piece,), prev[3] + (piece_id,))
            )
        ch = fragment[j - 1]
        prev = best[j - 1]
        if ch not in coverage and prev is not None:
            candidates.append(
                (prev[0] - UNK_LOGPROB, prev[1] + 1, prev[2] + (UNK,), prev[3] + (UNK_ID,))
            )
        if candidates:
            best[j] = min(candidates)
    final = best[n]
    if final is None:
        raise CoverageError(fragment[0])
    return list(final[3])


def encode_viterbi(text: str, model: UnigramModel) -> Segmentation:
    """Maximum-likelihood segmentation of ``text`` into piece ids."""
    out: list[int] = []
    for fragment in pretokenize(text):
        out.extend(_viterbi_fragment(fragment, model))
    return out


def encode_documents(
    corpus: Corpus, model: UnigramModel
) -> list[tuple[str, list[int]]]:
    """Encode every document, caching per unique fragment."""
    cache: dict[str, list[int]] = {}
    encoded: list[tuple[str, list[int]]] = []
    for doc in corpus.documents:
        ids: list[int] = []
        for fragment in pretokenize(doc.text):
            seg = cache.get(fragment)
            if seg is None:
                seg = _viterbi_fragment(fragment, model)
                cache[fragment] = seg
            ids.extend(seg)
        encoded.append((doc.id, ids))
    return encoded


def decode(segmentation: Sequence[int], model: UnigramModel) -> str:
    """Concatenate piece strings; the document separator renders as newline."""
    parts: list[str] = []
    for piece_id in segmentation:
        if piece_id == DOC_SEP_ID:
            parts.append("\n")
        else:
            parts.append(model.piece_string(piece_id))
    return "".join(parts).replace(BOUNDARY, " ")


# ---------------------------------------------------------------------------
# vocabulary file
# ---------------------------------------------------------------------------


def write_vocab(model: UnigramModel, path: str, coverage: float = 0.9999) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"#currikit-vocab\tsize={model.size}\tcoverage={coverage!r}\n")
        for name in model.specials:
            f.write(f"{escape_field(name)}\t0\n")
        for piece, lp in model.pieces:
            f.write(f"{escape_field(piece)}\t{lp!r}\n")


def read_vocab(path: str) -> UnigramModel:
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().rstrip("\n")
        fields = header.split("\t")
        if not fields or fields[0] != "#currikit-vocab":
            raise ValueError(f"{path}: not a vocabulary file (bad header)")
        size = int(fields[1].removeprefix("size="))
        specials: list[str] = []
        pieces: list[tuple[str, float]] = []
        for lineno, line in enumerate(f, start=2):
            piece_field, lp_field = line.rstrip("\n").split("\t")
            piece = unescape_field(piece_field)
            if lineno - 1 <= len(SPECIALS):
                specials.append(piece)
            else:
                pieces.append((piece, float(lp_field)))
        model = UnigramModel(pieces=pieces, specials=tuple(specials))
        if model.size != size:
            raise ValueError(
                f"{path}: header declares {size} entries, file has {model.size}"
            )
        return model
