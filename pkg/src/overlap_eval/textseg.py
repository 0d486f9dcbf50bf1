"""Rule-based sentence segmentation and word tokenization.

Both operations are deterministic, total functions: the segmenter uses
fixed punctuation rules plus an abbreviation guard list shipped as a text
asset, never a learned model, so output is bit-identical across platforms.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable

_TOKEN_RE = re.compile(r"[^\W_]+")
_BOUNDARY_PUNCT_RE = re.compile(r"[.!?]")
_OPENING_QUOTES = "\"'“‘«„"
_LEADING_WRAPPERS = "\"'“‘«„([{"


@dataclass(frozen=True)
class Sentence:
    """One sentence of a source document.

    ``index`` is the 0-based position within the document; indices in a
    document are consecutive from 0.
    """

    text: str
    index: int

    def __post_init__(self):
        if not self.text or not self.text.strip():
            raise ValueError("sentence text must contain a non-whitespace character")


def tokenize(text: str) -> list[str]:
    """Lowercase word tokens: maximal alphanumeric runs, digits kept."""
    return _TOKEN_RE.findall(text.lower())


def word_count(text: str) -> int:
    return len(tokenize(text))


def load_abbreviations(path: str | Path) -> frozenset[str]:
    """Read a guard list: one abbreviation per line, '#' lines are comments."""
    entries = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            entries.append(line)
    return frozenset(entries)


def default_abbreviations() -> frozenset[str]:
    """Guard list shipped with the package (data/abbreviations.txt)."""
    ref = resources.files("overlap_eval").joinpath("data/abbreviations.txt")
    entries = []
    for line in ref.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            entries.append(line)
    return frozenset(entries)


class SentenceSplitter:
    """Deterministic splitter with a configurable abbreviation guard.

    A boundary is a '.', '!' or '?' followed by whitespace and then an
    uppercase letter, a digit, or an opening quote. A '.' is guarded (never
    a boundary) when the whitespace-delimited token ending at it is on the
    abbreviation list; periods inside decimal numbers are never boundaries
    because they are not followed by whitespace.
    """

    def __init__(self, abbreviations: frozenset[str] | None = None):
        self.abbreviations = (
            abbreviations if abbreviations is not None else default_abbreviations()
        )

    def split(self, text: str) -> list[Sentence]:
        if not text or not text.strip():
            return []
        cuts = []
        for match in _BOUNDARY_PUNCT_RE.finditer(text):
            end = match.end()
            follow = end
            while follow < len(text) and text[follow].isspace():
                follow += 1
            if follow == end or follow >= len(text):
                continue
            nxt = text[follow]
            if not (nxt.isupper() or nxt.isdigit() or nxt in _OPENING_QUOTES):
                continue
            if match.group() == "." and self._is_guarded(text, end):
                continue
            cuts.append(end)
        pieces = []
        start = 0
        for cut in cuts:
            pieces.append(text[start:cut])
            start = cut
        pieces.append(text[start:])
        sentences = []
        for piece in pieces:
            stripped = piece.strip()
            if stripped:
                sentences.append(Sentence(stripped, len(sentences)))
        return sentences

    def _is_guarded(self, text: str, end: int) -> bool:
        token_start = end
        while token_start > 0 and not text[token_start - 1].isspace():
            token_start -= 1
        token = text[token_start:end].lstrip(_LEADING_WRAPPERS)
        return token in self.abbreviations


_DEFAULT_SPLITTER: SentenceSplitter | None = None


def _default_splitter() -> SentenceSplitter:
    global _DEFAULT_SPLITTER
    if _DEFAULT_SPLITTER is None:
        _DEFAULT_SPLITTER = SentenceSplitter()
    return _DEFAULT_SPLITTER


def split_sentences(text: str) -> list[Sentence]:
    """Split a document with the packaged abbreviation guard list."""
    return _default_splitter().split(text)


def as_sentences(texts: Iterable[str]) -> list[Sentence]:
    """Wrap pre-segmented sentence strings, dropping blank entries."""
    sentences = []
    for raw in texts:
        stripped = raw.strip()
        if stripped:
            sentences.append(Sentence(stripped, len(sentences)))
    return sentences
