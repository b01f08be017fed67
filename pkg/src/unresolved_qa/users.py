"""Asker behaviour and popularity metrics.

Answer rejection ratio (ARR), last access delay (LAD), question votes and
owner reputation, plus the ``ln(1 + x)`` transform applied to the skewed ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime
from typing import Iterable, Optional


SECONDS_PER_DAY = 86400


class FutureDateError(ValueError):
    """A timestamp lies after the analysis date."""


@dataclass(frozen=True)
class QuestionOutcome:
    question_id: int
    was_answered: bool
    was_resolved: bool

    def __post_init__(self):
        if self.was_resolved and not self.was_answered:
            raise ValueError(
                f"question {self.question_id}: resolved but never answered"
            )


@dataclass(frozen=True)
class UserProfile:
    user_id: int
    reputation: int
    last_access_date: datetime
    question_history: tuple[QuestionOutcome, ...] = field(default_factory=tuple)


@dataclass(frozen=True)
class BehaviourFeatures:
    arr: float
    arr_imputed: bool
    lad_days: int
    log_lad: float
    votes: int
    log_reputation: float


def answer_rejection_ratio(
    profile: UserProfile,
    exclude_question: Optional[int] = None,
    fallback: float = math.nan,
) -> tuple[float, bool]:
    """Fraction of the user's answered questions left without an accepted answer.

    The target question is left out so its own label cannot leak into the
    feature. When nothing remains, ``fallback`` (normally the training-set
    mean) is returned and the second element of the result is True.
    """
    answered = [
        q
        for q in profile.question_history
        if q.was_answered and q.question_id != exclude_question
    ]
    if not answered:
        return fallback, True
    rejected = sum(1 for q in answered if not q.was_resolved)
    return rejected / len(answered), False


def mean_defined(values: Iterable[float]) -> float:
    """Mean of the non-NaN values, NaN if there are none."""
    total = 0.0
    n = 0
    for v in values:
        if not math.isnan(v):
            total += v
            n += 1
    return total / n if n else math.nan


def last_access_delay(profile: UserProfile, analysis_date: datetime) -> int:
    """Whole days between the user's last access and ``analysis_date``."""
    delta = analysis_date - profile.last_access_date
    seconds = delta.total_seconds()
    if seconds < 0:
        raise FutureDateError(
            f"user {profile.user_id}: last access {profile.last_access_date.isoformat()} "
            f"is after analysis date {analysis_date.isoformat()}"
        )
    return int(seconds // SECONDS_PER_DAY)


def log1p_transform(x: float) -> float:
    if x < 0:
        raise ValueError(f"log1p_transform needs x >= 0, got {x}")
    return math.log1p(x)


def popularity(question_score: int, owner: UserProfile) -> tuple[int, float]:
    """Raw question votes and log-transformed owner reputation."""
    return int(question_score), log1p_transform(owner.reputation)


def behaviour_features(
    profile: UserProfile,
    question_id: int,
    question_score: int,
    analysis_date: datetime,
    arr_fallback: float = math.nan,
) -> BehaviourFeatures:
    arr, imputed = answer_rejection_ratio(profile, question_id, arr_fallback)
    lad = last_access_delay(profile, analysis_date)
    votes, log_rep = popularity(question_score, profile)
    return BehaviourFeatures(
        arr=arr,
        arr_imputed=imputed,
        lad_days=lad,
        log_lad=log1p_transform(lad),
        votes=votes,
        log_reputation=log_rep,
    )
