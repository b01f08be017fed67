"""Text and code readability.

Text readability (TR) averages five grade-level formulas. Code readability
(CR) is a logistic scorer over surface features of the code blocks; the
default weights only encode the expected direction of each feature and are
meant to be replaced when a trained model is available.
"""

from __future__ import annotations

import math
import re
from dataclasses import astuple, dataclass, fields
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence, Union

from .content import TextStats

Grade = Optional[float]

# logits are clipped here so the score stays strictly inside (0, 1)
_MAX_LOGIT = 30.0
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUMBER = re.compile(r"(?<![A-Za-z0-9_.])\d+(?:\.\d+)?")
_COMMENT = re.compile(r"//|/\*|\*/|#|^\s*\*|^\s*--")
BRANCHING = frozenset(("if", "for", "while", "switch", "case", "catch"))
TAB_WIDTH = 4


class ConfigError(ValueError):
    """Scorer weights do not match the feature vector."""


# --- text readability -------------------------------------------------------


def flesch_kincaid(stats: TextStats) -> Grade:
    if stats.words == 0 or stats.sentences == 0:
        return None
    return 0.39 * stats.words / stats.sentences + 11.8 * stats.syllables / stats.words - 15.59


def gunning_fog(stats: TextStats) -> Grade:
    if stats.words == 0 or stats.sentences == 0:
        return None
    return 0.4 * (stats.words / stats.sentences + 100.0 * stats.complex_words / stats.words)


def coleman_liau(stats: TextStats) -> Grade:
    if stats.words == 0:
        return None
    letters_per_100 = 100.0 * stats.letters / stats.words
    sentences_per_100 = 100.0 * stats.sentences / stats.words
    return 0.0588 * letters_per_100 - 0.296 * sentences_per_100 - 15.8


def smog(stats: TextStats) -> Grade:
    if stats.sentences == 0:
        return None
    return 1.0430 * math.sqrt(stats.complex_words * 30.0 / stats.sentences) + 3.1291


def ari(stats: TextStats) -> Grade:
    if stats.words == 0 or stats.sentences == 0:
        return None
    return 4.71 * stats.chars / stats.words + 0.5 * stats.words / stats.sentences - 21.43


FORMULAS = {
    "flesch_kincaid": flesch_kincaid,
    "gunning_fog": gunning_fog,
    "coleman_liau": coleman_liau,
    "smog": smog,
    "ari": ari,
}


def average_grade(grades: Sequence[Grade]) -> Grade:
    """Mean of the defined grades; None when none is defined."""
    defined = [g for g in grades if g is not None]
    if not defined:
        return None
    return sum(defined) / len(defined)


def text_grades(stats: TextStats) -> dict[str, Grade]:
    return {name: f(stats) for name, f in FORMULAS.items()}


# --- code readability -------------------------------------------------------


@dataclass(frozen=True)
class CodeFeatureVector:
    avg_line_length: float = 0.0
    max_line_length: float = 0.0
    avg_identifier_length: float = 0.0
    identifiers_per_line: float = 0.0
    keywords_per_line: float = 0.0
    numbers_per_line: float = 0.0
    comments_per_line: float = 0.0
    blank_line_fraction: float = 0.0
    avg_indentation: float = 0.0
    branching_tokens_per_line: float = 0.0
    empty: bool = True

    @classmethod
    def names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls) if f.name != "empty")

    def values(self) -> tuple[float, ...]:
        return astuple(self)[:-1]


@lru_cache(maxsize=1)
def keywords() -> frozenset[str]:
    text = resources.files(__package__).joinpath("resources/keywords.txt").read_text("utf-8")
    return frozenset(
        w for line in text.splitlines() if not line.startswith("#") for w in line.split()
    )


def _indent_width(line: str) -> int:
    width = 0
    for c in line:
        if c == " ":
            width += 1
        elif c == "\t":
            width += TAB_WIDTH
        else:
            break
    return width


def code_features(code_blocks: Sequence[str]) -> CodeFeatureVector:
    """Language-agnostic surface features over all code blocks of a post.

    Identifiers are letter-initial word runs that are not keywords.
    """
    lines = "\n".join(code_blocks).splitlines()
    if not lines or not any(line.strip() for line in lines):
        return CodeFeatureVector()
    kw = keywords()
    n = len(lines)
    ident_lengths: list[int] = []
    n_keywords = n_numbers = n_comments = n_blank = n_branch = 0
    indents = []
    for line in lines:
        if not line.strip():
            n_blank += 1
            continue
        indents.append(_indent_width(line))
        if _COMMENT.search(line):
            n_comments += 1
        n_numbers += len(_NUMBER.findall(line))
        for tok in _IDENT.findall(line):
            low = tok.lower()
            if low in BRANCHING:
                n_branch += 1
            if low in kw:
                n_keywords += 1
            else:
                ident_lengths.append(len(tok))
    lengths = [len(line) for line in lines]
    return CodeFeatureVector(
        avg_line_length=sum(lengths) / n,
        max_line_length=float(max(lengths)),
        avg_identifier_length=sum(ident_lengths) / len(ident_lengths) if ident_lengths else 0.0,
        identifiers_per_line=len(ident_lengths) / n,
        keywords_per_line=n_keywords / n,
        numbers_per_line=n_numbers / n,
        comments_per_line=n_comments / n,
        blank_line_fraction=n_blank / n,
        avg_indentation=sum(indents) / len(indents),
        branching_tokens_per_line=n_branch / n,
        empty=False,
    )


@dataclass(frozen=True)
class ScorerWeights:
    bias: float
    weights: tuple[float, ...]
    means: tuple[float, ...]
    scales: tuple[float, ...]

    def __post_init__(self):
        n = len(CodeFeatureVector.names())
        for name in ("weights", "means", "scales"):
            if len(getattr(self, name)) != n:
                raise ConfigError(
                    f"{name} has {len(getattr(self, name))} entries, feature vector has {n}"
                )
        if any(s <= 0 for s in self.scales):
            raise ConfigError("scales must be positive")


def parse_weights(text: str) -> ScorerWeights:
    """Parse ``key = value`` scorer config (``bias``, ``weight.<f>``, ``mean.<f>``, ``scale.<f>``)."""
    names = CodeFeatureVector.names()
    table: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected key = value")
        try:
            table[key.strip()] = float(value)
        except ValueError:
            raise ConfigError(f"line {lineno}: bad number {value.strip()!r}") from None
    expected = {"bias"} | {f"{p}.{n}" for p in ("weight", "mean", "scale") for n in names}
    unknown = sorted(set(table) - expected)
    missing = sorted(expected - set(table))
    if unknown or missing:
        raise ConfigError(f"scorer config mismatch: unknown={unknown} missing={missing}")
    return ScorerWeights(
        bias=table["bias"],
        weights=tuple(table[f"weight.{n}"] for n in names),
        means=tuple(table[f"mean.{n}"] for n in names),
        scales=tuple(table[f"scale.{n}"] for n in names),
    )


def load_weights(path: Union[str, Path, None] = None) -> ScorerWeights:
    if path is None:
        return default_weights()
    return parse_weights(Path(path).read_text("utf-8"))


@lru_cache(maxsize=1)
def default_weights() -> ScorerWeights:
    text = resources.files(__package__).joinpath("resources/cr_weights.txt").read_text("utf-8")
    return parse_weights(text)


def _sigmoid(t: float) -> float:
    if t >= 0:
        return 1.0 / (1.0 + math.exp(-t))
    e = math.exp(t)
    return e / (1.0 + e)


def code_readability(
    features: Union[CodeFeatureVector, Sequence[float]],
    weights: Optional[ScorerWeights] = None,
) -> float:
    """Readability score in (0, 1); higher reads better."""
    weights = weights or default_weights()
    values = features.values() if isinstance(features, CodeFeatureVector) else tuple(features)
    if len(values) != len(weights.weights):
        raise ConfigError(
            f"feature vector has {len(values)} entries, scorer expects {len(weights.weights)}"
        )
    logit = weights.bias + sum(
        w * (v - m) / s
        for w, v, m, s in zip(weights.weights, values, weights.means, weights.scales)
    )
    if math.isnan(logit):
        raise ConfigError("scorer produced NaN")
    return _sigmoid(min(max(logit, -_MAX_LOGIT), _MAX_LOGIT))


@dataclass(frozen=True)
class ReadabilityFeatures:
    tr_grade: Grade
    grades: dict
    cr_score: Optional[float]


def readability(stats: TextStats, code_blocks: Sequence[str], weights=None) -> ReadabilityFeatures:
    grades = text_grades(stats)
    feats = code_features(code_blocks)
    return ReadabilityFeatures(
        tr_grade=average_grade(list(grades.values())),
        grades=grades,
        cr_score=None if feats.empty else code_readability(feats, weights),
    )
