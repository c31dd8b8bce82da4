"""Raw-text ingestion and surface tokenization.

A corpus is an ordered list of documents read from UTF-8 text files in one of
two framing modes: ``plain-lines`` (one document per line) or
``blank-line-documents`` (documents separated by blank lines).  Document text
is NFC-normalized and CRLF becomes LF.

Surface tokenization is a declared convention, not model-specific: word
tokens are maximal runs of non-whitespace characters outside the Unicode
punctuation/symbol classes (P*/S*), with apostrophes kept word-internal, and
every punctuation/symbol character becomes its own single-character token.
Sentence boundaries fall after ``. ! ? …`` followed by whitespace-or-end and
at newlines.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

FORMAT_PLAIN_LINES = "plain-lines"
FORMAT_BLANK_LINE_DOCUMENTS = "blank-line-documents"
CORPUS_FORMATS = (FORMAT_PLAIN_LINES, FORMAT_BLANK_LINE_DOCUMENTS)

_SENTENCE_TERMINALS = frozenset(".!?…")
_APOSTROPHES = frozenset("'’")


class DecodeError(ValueError):
    """Invalid UTF-8 in an input file, reported with the absolute byte offset."""

    def __init__(self, path: str, byte_offset: int, reason: str) -> None:
        super().__init__(f"{path}: invalid UTF-8 at byte {byte_offset}: {reason}")
        self.path = path
        self.byte_offset = byte_offset


class TokenKind(Enum):
    WORD = "word"
    PUNCTUATION = "punctuation"


@dataclass(frozen=True)
class SurfaceToken:
    text: str
    kind: TokenKind

    @property
    def char_len(self) -> int:
        return len(self.text)


@dataclass(frozen=True)
class SourceSpan:
    path: str
    byte_start: int
    byte_end: int


@dataclass(frozen=True)
class Document:
    id: str
    source: SourceSpan
    text: str


@dataclass(frozen=True)
class CorpusStats:
    documents: int
    words: int


@dataclass
class Corpus:
    documents: list[Document]

    def stats(self) -> CorpusStats:
        words = 0
        for doc in self.documents:
            for tok in tokenize_surface(doc.text):
                if tok.kind is TokenKind.WORD:
                    words += 1
        return CorpusStats(documents=len(self.documents), words=words)


# ---------------------------------------------------------------------------
# loading
# ---------------------------------------------------------------------------


def _iter_raw_lines(data: bytes) -> Iterable[tuple[int, int, bytes]]:
    """Yield (byte_start, byte_end, line_bytes) with CRLF/LF endings stripped."""
    start = 0
    n = len(data)
    while start < n:
        nl = data.find(b"\n", start)
        end = n if nl < 0 else nl
        line = data[start:end]
        if line.endswith(b"\r"):
            line = line[:-1]
        yield start, end, line
        if nl < 0:
            break
        start = nl + 1


def _decode_line(path: str, byte_start: int, raw: bytes) -> str:
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DecodeError(path, byte_start + exc.start, exc.reason) from None
    return unicodedata.normalize("NFC", text)


def load_corpus(paths: Sequence[str | Path], format: str = FORMAT_PLAIN_LINES) -> Corpus:
    """Read files into a Corpus; document order is file order x in-file order."""
    if format not in CORPUS_FORMATS:
        raise ValueError(f"unknown corpus format {format!r}; expected one of {CORPUS_FORMATS}")
    documents: list[Document] = []
    ordinal = 0
    for path in paths:
        path_str = str(path)
        try:
            data = Path(path).read_bytes()
        except OSError as exc:
            raise OSError(f"cannot read corpus file {path_str}: {exc}") from exc
        if format == FORMAT_PLAIN_LINES:
            for start, end, raw in _iter_raw_lines(data):
                text = _decode_line(path_str, start, raw)
                if not text:
                    continue
                documents.append(
                    Document(
                        id=f"d{ordinal:06d}",
                        source=SourceSpan(path_str, start, end),
                        text=text,
                    )
                )
                ordinal += 1
        else:
            block: list[str] = []
            block_start = block_end = 0
            for start, end, raw in _iter_raw_lines(data):
                text = _decode_line(path_str, start, raw)
                if text.strip():
                    if not block:
                        block_start = start
                    block.append(text)
                    block_end = end
                elif block:
                    documents.append(
                        Document(
                            id=f"d{ordinal:06d}",
                            source=SourceSpan(path_str, block_start, block_end),
                            text="\n".join(block),
                        )
                    )
                    ordinal += 1
                    block = []
            if block:
                documents.append(
                    Document(
                        id=f"d{ordinal:06d}",
                        source=SourceSpan(path_str, block_start, block_end),
                        text="\n".join(block),
                    )
                )
                ordinal += 1
    return Corpus(documents=documents)


# ---------------------------------------------------------------------------
# tokenization
# ---------------------------------------------------------------------------


def _is_punct_class(ch: str) -> bool:
    return unicodedata.category(ch)[0] in ("P", "S")


def _is_word_char(ch: str) -> bool:
    return not ch.isspace() and not _is_punct_class(ch)


def tokenize_surface(text: str) -> list[SurfaceToken]:
    """Split text into Word/Punctuation tokens; whitespace separates only."""
    tokens: list[SurfaceToken] = []
    buf_start = -1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            if buf_start >= 0:
                tokens.append(SurfaceToken(text[buf_start:i], TokenKind.WORD))
                buf_start = -1
            i += 1
            continue
        if _is_punct_class(ch):
            # apostrophes stay inside a word when flanked by word characters
            if (
                ch in _APOSTROPHES
                and buf_start >= 0
                and i + 1 < n
                and _is_word_char(text[i + 1])
            ):
                i += 1
                continue
            if buf_start >= 0:
                tokens.append(SurfaceToken(text[buf_start:i], TokenKind.WORD))
                buf_start = -1
            tokens.append(SurfaceToken(ch, TokenKind.PUNCTUATION))
            i += 1
            continue
        if buf_start < 0:
            buf_start = i
        i += 1
    if buf_start >= 0:
        tokens.append(SurfaceToken(text[buf_start:], TokenKind.WORD))
    return tokens


def split_sentences(text: str) -> list[tuple[int, int]]:
    """Return sentence spans partitioning ``text``; every span has content.

    Boundaries fall after a sentence terminal followed by whitespace-or-end
    and after each newline.  Whitespace-only fragments are folded into the
    following sentence (or the preceding one at end of text), so each span
    contains at least one non-whitespace character.  Empty text yields [].
    """
    n = len(text)
    if n == 0:
        return []
    cuts: list[int] = []
    for i, ch in enumerate(text):
        if ch == "\n":
            cuts.append(i + 1)
        elif ch in _SENTENCE_TERMINALS and (i + 1 == n or text[i + 1].isspace()):
            cuts.append(i + 1)
    if not cuts or cuts[-1] != n:
        cuts.append(n)

    spans: list[tuple[int, int]] = []
    pending_start = 0
    prev = 0
    for cut in cuts:
        if cut == prev:
            continue
        fragment = text[prev:cut]
        if fragment.strip():
            spans.append((pending_start, cut))
            pending_start = cut
        prev = cut
    if pending_start < n:
        if spans:
            start, _ = spans[-1]
            spans[-1] = (start, n)
        else:
            spans.append((0, n))
    return spans
