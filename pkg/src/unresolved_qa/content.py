"""Post body segmentation and text tokenization.

Splits Stack Overflow HTML into code blocks and prose, and provides the
sentence / word / syllable counters behind the readability formulas and the
token normalization used to build topic-model documents.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from html.parser import HTMLParser
from importlib import resources

_BLOCK_TAGS = frozenset(
    "p div br hr li ul ol h1 h2 h3 h4 h5 h6 blockquote table tr td th dl dt dd "
    "section article header footer img".split()
)
_SKIP_TAGS = frozenset(("script", "style"))

ABBREVIATIONS = ("e.g.", "i.e.", "etc.", "vs.")
_SENTENCE_END = re.compile(r"[.!?]+(?=\s|$)")
_WORD = re.compile(r"[^\W_]+(?:['’][^\W_]+)*")
_VOWEL_GROUP = re.compile(r"[aeiouy]+")


@dataclass(frozen=True)
class ContentSegments:
    code_blocks: tuple[str, ...]
    prose: str


@dataclass(frozen=True)
class TextStats:
    sentences: int = 0
    words: int = 0
    syllables: int = 0
    complex_words: int = 0
    letters: int = 0
    chars: int = 0


class _Segmenter(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.code_blocks: list[str] = []
        self.prose: list[str] = []
        self._pre_depth = 0
        self._code_depth = 0
        self._skip_depth = 0
        self._buf: list[str] = []

    def handle_starttag(self, tag, attrs):
        if self._pre_depth:
            if tag == "pre":
                self._pre_depth += 1
            return
        if tag in _SKIP_TAGS:
            self._skip_depth += 1
        elif tag == "pre":
            self._pre_depth = 1
            self._code_depth = 0
            self._buf = []
        elif tag == "code":
            if self._code_depth == 0:
                self._buf = []
            self._code_depth += 1
        elif tag in _BLOCK_TAGS:
            self.prose.append(" ")

    def handle_startendtag(self, tag, attrs):
        if not self._pre_depth and not self._code_depth and tag in _BLOCK_TAGS:
            self.prose.append(" ")

    def handle_endtag(self, tag):
        if self._pre_depth:
            if tag == "pre":
                self._pre_depth -= 1
                if self._pre_depth == 0:
                    self._flush_pre()
            return
        if tag in _SKIP_TAGS:
            self._skip_depth = max(0, self._skip_depth - 1)
        elif tag == "code" and self._code_depth:
            self._code_depth -= 1
            if self._code_depth == 0:
                self._flush_code()
        elif tag in _BLOCK_TAGS:
            self.prose.append(" ")

    def handle_data(self, data):
        if self._pre_depth or self._code_depth:
            self._buf.append(data)
        elif not self._skip_depth:
            self.prose.append(data)

    def _flush_pre(self):
        self.code_blocks.append("".join(self._buf))
        self._buf = []
        self.prose.append(" ")

    def _flush_code(self):
        text = "".join(self._buf)
        self._buf = []
        if "\n" in text.strip():
            self.code_blocks.append(text)
            self.prose.append(" ")
        else:
            self.prose.append(text)

    def close(self):
        super().close()
        if self._pre_depth:
            self._pre_depth = 0
            self._flush_pre()
        elif self._code_depth:
            self._code_depth = 0
            self._flush_code()


def segment_html(body: str) -> ContentSegments:
    """Separate code blocks from prose.

    ``<pre>`` content and multi-line ``<code>`` spans become code blocks with
    their text kept byte-exact (entities decoded). Single-line inline
    ``<code>`` stays in the prose as ordinary words.
    """
    parser = _Segmenter()
    parser.feed(body)
    parser.close()
    prose = " ".join("".join(parser.prose).split())
    return ContentSegments(code_blocks=tuple(parser.code_blocks), prose=prose)


def _ends_with_abbreviation(text: str) -> bool:
    lowered = text.lower()
    for abbr in ABBREVIATIONS:
        if lowered.endswith(abbr):
            before = lowered[: -len(abbr)]
            if not before or not before[-1].isalnum():
                return True
    return False


def split_sentences(prose: str) -> list[str]:
    sentences = []
    start = 0
    for m in _SENTENCE_END.finditer(prose):
        if m.group() == "." and _ends_with_abbreviation(prose[start : m.end()]):
            continue
        sentences.append(prose[start : m.end()])
        start = m.end()
    sentences.append(prose[start:])
    return [s.strip() for s in sentences if _WORD.search(s)]


def tokenize_words(text: str) -> list[str]:
    # apostrophes count only inside a word, so quoted 'foo' yields foo
    return _WORD.findall(text)


def count_syllables(word: str) -> int:
    """Vowel-group syllable estimate, never below 1."""
    w = word.lower()
    if not any(c.isalpha() for c in w):
        return 1
    count = len(_VOWEL_GROUP.findall(w))
    if len(w) >= 2 and w.endswith("e") and w[-2] != "l" and count > 1:
        count -= 1
    return max(count, 1)


def text_stats(prose: str) -> TextStats:
    words = tokenize_words(prose)
    if not words:
        return TextStats()
    syllables = [count_syllables(w) for w in words]
    return TextStats(
        sentences=len(split_sentences(prose)),
        words=len(words),
        syllables=sum(syllables),
        complex_words=sum(1 for s in syllables if s >= 3),
        letters=sum(1 for w in words for c in w if c.isalpha()),
        chars=sum(1 for w in words for c in w if c.isalnum()),
    )


@lru_cache(maxsize=1)
def stopwords() -> frozenset[str]:
    text = resources.files(__package__).joinpath("resources/stopwords.txt").read_text("utf-8")
    return frozenset(
        line.strip() for line in text.splitlines() if line.strip() and not line.startswith("#")
    )


def normalize_for_topics(prose: str) -> list[str]:
    """Lowercased content tokens for topic modelling.

    Drops stopwords, tokens shorter than two characters and pure numbers.
    """
    stop = stopwords()
    out = []
    for w in tokenize_words(prose):
        tok = w.lower().replace("'", "").replace("’", "")
        if len(tok) < 2 or tok.isdigit() or tok in stop:
            continue
        out.append(tok)
    return out
