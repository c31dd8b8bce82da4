"""Deterministic synthetic corpus with mixed-complexity domains.

Three document families mirror the qualitative spread of the shared-task
data: repetitive child-speech lines built from a tiny vocabulary, mid-range
pseudo-English prose with a Zipf-distributed lexicon, and HTML-entity noise
with collapsed spacing and hex junk.  All sampling flows from SplitMix64, so
a (word_target, seed) pair always yields the same documents on any platform.
"""

from __future__ import annotations

from pathlib import Path

from .rng import SplitMix64

_CHILD_WORDS = (
    "up", "down", "go", "no", "yes", "mommy", "daddy", "baby", "ball",
    "dog", "cat", "more", "milk", "look", "wow", "bye", "hi", "big",
)

_FUNCTION_WORDS = (
    "the", "a", "of", "to", "and", "in", "it", "is", "was", "he", "she",
    "for", "on", "with", "as", "at", "by", "this", "that", "from", "or",
    "an", "be", "his", "her", "they", "we", "you", "not", "are", "but",
)

_CONSONANTS = "bcdfghjklmnprstvw"
_VOWELS = "aeiou"
_HTML_BITS = ("&amp;gt;", "&amp;lt;", "&amp;amp;", "&amp;quot;", "&amp;nbsp;")
_HTML_TAGS = ("td", "tr", "div", "span", "br", "p", "li")


def _syllable(rng: SplitMix64) -> str:
    return _CONSONANTS[rng.next_below(len(_CONSONANTS))] + _VOWELS[rng.next_below(len(_VOWELS))]


def _build_lexicon(rng: SplitMix64, size: int) -> list[str]:
    words: list[str] = []
    seen: set[str] = set()
    while len(words) < size:
        n_syll = 1 + rng.next_below(3)
        word = "".join(_syllable(rng) for _ in range(n_syll + 1))
        if word not in seen:
            seen.add(word)
            words.append(word)
    return words


def _zipf_cumulative(size: int) -> list[float]:
    total = 0.0
    cum: list[float] = []
    for i in range(size):
        total += 1.0 / (i + 2.7)
        cum.append(total)
    return [c / total for c in cum]


def _zipf_pick(rng: SplitMix64, cum: list[float]) -> int:
    u = rng.next_u64() / 2.0**64
    lo, hi = 0, len(cum) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if cum[mid] < u:
            lo = mid + 1
        else:
            hi = mid
    return lo


def _child_document(rng: SplitMix64) -> str:
    lines: list[str] = []
    for _ in range(2 + rng.next_below(4)):
        word = _CHILD_WORDS[rng.next_below(len(_CHILD_WORDS))]
        repeats = 1 + rng.next_below(9)
        line = " ".join([word] * repeats)
        if rng.next_below(2):
            line += "!"
        lines.append(line)
    return "\n".join(lines)


def _prose_sentence(rng: SplitMix64, lexicon: list[str], cum: list[float]) -> str:
    length = 8 + rng.next_below(11)
    words: list[str] = []
    for k in range(length):
        if rng.next_below(10) < 4:
            words.append(_FUNCTION_WORDS[rng.next_below(len(_FUNCTION_WORDS))])
        else:
            words.append(lexicon[_zipf_pick(rng, cum)])
        if 0 < k < length - 1 and rng.next_below(12) == 0:
            words[-1] += ","
    sentence = " ".join(words)
    return sentence[0].upper() + sentence[1:] + "."


def _prose_document(rng: SplitMix64, lexicon: list[str], cum: list[float]) -> str:
    return " ".join(_prose_sentence(rng, lexicon, cum) for _ in range(2 + rng.next_below(4)))


def _hex_junk(rng: SplitMix64) -> str:
    return "x" + "".join("0123456789abcdef"[rng.next_below(16)] for _ in range(4 + rng.next_below(5)))


def _html_document(rng: SplitMix64) -> str:
    parts: list[str] = []
    for _ in range(40 + rng.next_below(80)):
        choice = rng.next_below(10)
        if choice < 4:
            parts.append(_HTML_BITS[rng.next_below(len(_HTML_BITS))])
        elif choice < 6:
            parts.append(_HTML_TAGS[rng.next_below(len(_HTML_TAGS))] + ";")
        elif choice < 9:
            parts.append(_hex_junk(rng))
        else:
            parts.append(" ")
    return "".join(parts)


def generate_mixed_corpus(
    word_target: int,
    seed: int,
    lexicon_size: int = 6000,
    child_per_mille: int = 150,
    html_per_mille: int = 40,
) -> list[str]:
    """Documents totalling roughly ``word_target`` whitespace-separated words."""
    rng = SplitMix64(seed)
    lexicon = _build_lexicon(rng, lexicon_size)
    cum = _zipf_cumulative(lexicon_size)
    documents: list[str] = []
    words = 0
    while words < word_target:
        draw = rng.next_below(1000)
        if draw < child_per_mille:
            doc = _child_document(rng)
        elif draw < child_per_mille + html_per_mille:
            doc = _html_document(rng)
        else:
            doc = _prose_document(rng, lexicon, cum)
        documents.append(doc)
        words += len(doc.split())
    return documents


def write_corpus_file(documents: list[str], path: str | Path) -> None:
    """Write documents in blank-line-documents framing."""
    Path(path).write_text("\n\n".join(documents) + "\n", encoding="utf-8")
