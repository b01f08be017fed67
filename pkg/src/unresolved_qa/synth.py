"""Synthetic Posts/Users dumps with known class-conditional behaviour.

Every target question qualifies for the dataset (old enough, at least ten
answers) and its owner is drawn from a class-specific profile:

=====================  ==============  ==============
quantity               unresolved      resolved
=====================  ==============  ==============
answer rejection       Beta(5, 2.5)    Beta(1.5, 4.5)
last access delay      LogN(ln 100, 1.1) LogN(ln 18, 1.1)
question votes         N(3, 5)         N(8, 6)
reputation             LogN(ln 150, 1.2) LogN(ln 900, 1.2)
topics per question    3 to 5          1 to 2
=====================  ==============  ==============

Owners also ask a few short "history" questions (1 to 3 answers, so they
never qualify themselves) whose acceptance follows the owner's rejection
propensity; these drive the answer rejection ratio. A small share of recent
heavily-answered questions is added so the age rule has something to drop.
"""

from __future__ import annotations

import html
import logging
import random
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone

import numpy as np

from .ingest import PostRow, PostType, UserRow

LOGGER = logging.getLogger(__name__)

ANALYSIS_DATE = datetime(2015, 2, 18, tzinfo=timezone.utc)
_ONSETS = "b c d f g h k l m n p r s t v z br cr dr gr pl st tr".split()
_NUCLEI = "a e i o u ai ea io ou".split()
_CODAS = "n r s t x l m nd rk st".split()
_FILLER = "how do i get the value when it is not working with my in this".split()
_CODE_LINES = (
    "int count = items.size();",
    "for (int i = 0; i < count; i++) {",
    "    total += items.get(i);",
    "}",
    "if (result == null) return;",
    "var data = fetch(url);",
    "print(value)",
    "# convert before use",
    "x = compute(x, 3)",
)


@dataclass(frozen=True)
class SynthConfig:
    n_questions: int = 2000
    unresolved_fraction: float = 0.5
    seed: int = 42
    n_topics: int = 30
    words_per_topic: int = 25
    noise_fraction: float = 0.05
    analysis_date: datetime = ANALYSIS_DATE


@dataclass
class SynthDump:
    posts: list[PostRow]
    users: list[UserRow]
    labels: dict[int, str]  # target question id -> label


def _topic_vocabulary(rng: np.random.Generator, n_topics: int, per_topic: int) -> list[list[str]]:
    seen: set[str] = set(_FILLER)
    topics = []
    for _ in range(n_topics):
        words = []
        while len(words) < per_topic:
            n_syll = rng.integers(2, 4)
            w = "".join(
                _ONSETS[rng.integers(len(_ONSETS))] + _NUCLEI[rng.integers(len(_NUCLEI))]
                for _ in range(n_syll)
            ) + _CODAS[rng.integers(len(_CODAS))]
            if w not in seen:
                seen.add(w)
                words.append(w)
        topics.append(words)
    return topics


class _Writer:
    def __init__(self, rand: random.Random, vocab):
        self.rand = rand
        self.vocab = vocab

    def sentence(self, topic_ids) -> str:
        rnd = self.rand.random
        words = []
        for _ in range(6 + int(rnd() * 7)):
            if rnd() < 0.25:
                words.append(_FILLER[int(rnd() * len(_FILLER))])
            else:
                topic = self.vocab[topic_ids[int(rnd() * len(topic_ids))]]
                words.append(topic[int(rnd() * len(topic))])
        words[0] = words[0].capitalize()
        return " ".join(words) + ("." if rnd() < 0.8 else "?")

    def body(self, topic_ids, n_sentences, code_prob) -> str:
        r = self.rand
        parts = [f"<p>{html.escape(self.sentence(topic_ids))}</p>" for _ in range(n_sentences)]
        if r.random() < code_prob:
            lines = [r.choice(_CODE_LINES) for _ in range(r.randint(2, 6))]
            parts.insert(
                r.randint(1, len(parts)),
                "<pre><code>" + html.escape("\n".join(lines)) + "\n</code></pre>",
            )
        return "\n".join(parts)


def _timestamp(base: datetime) -> datetime:
    # whole milliseconds, like the public dumps
    return base.replace(microsecond=(base.microsecond // 1000) * 1000)


def generate(config: SynthConfig = SynthConfig()) -> SynthDump:
    if config.n_questions < 20:
        LOGGER.warning("n_questions=%d is below 2 x 10 folds", config.n_questions)
    rng = np.random.default_rng(config.seed)
    vocab = _topic_vocabulary(rng, config.n_topics, config.words_per_topic)
    rand = random.Random(int(rng.integers(1 << 62)))
    writer = _Writer(rand, vocab)
    analysis = config.analysis_date

    n = config.n_questions
    n_unres = int(round(n * config.unresolved_fraction))
    is_unres = np.zeros(n, dtype=bool)
    is_unres[rng.permutation(n)[:n_unres]] = True

    n_answerers = max(50, n // 10)
    answerer_base = n + 1
    posts: list[PostRow] = []
    users: list[UserRow] = []
    labels: dict[int, str] = {}
    next_id = 1

    def new_id() -> int:
        nonlocal next_id
        next_id += 1
        return next_id - 1

    def days_before(days: float) -> datetime:
        return _timestamp(analysis - timedelta(seconds=float(days) * 86400.0))

    def add_answers(qid, q_date, topic_ids, count, accept_prob, prefer_best=0.6):
        answers = []
        for _ in range(count):
            a_date = _timestamp(q_date + timedelta(seconds=rand.uniform(60, 30 * 86400)))
            a_topics = topic_ids[:1] if rand.random() < 0.8 else [rand.randrange(config.n_topics)]
            answers.append(
                PostRow(
                    id=new_id(),
                    post_type=PostType.ANSWER,
                    creation_date=min(a_date, analysis),
                    score=max(-3, round(rand.gauss(3, 3))),
                    body=writer.body(a_topics, rand.randint(1, 3), 0.3),
                    parent_id=qid,
                    owner_user_id=answerer_base + rand.randrange(n_answerers),
                )
            )
        accepted = None
        if answers and rand.random() < accept_prob:
            if rand.random() < prefer_best:
                accepted = min(answers, key=lambda a: (-a.score, a.creation_date, a.id)).id
            else:
                accepted = rand.choice(answers).id
        return answers, accepted

    def add_question(owner, q_date, topic_ids, votes, n_answers, accept_prob, n_sentences):
        qid = new_id()
        body = writer.body(topic_ids, n_sentences, 0.5)
        answers, accepted = add_answers(qid, q_date, topic_ids, n_answers, accept_prob)
        posts.append(
            PostRow(
                id=qid,
                post_type=PostType.QUESTION,
                creation_date=q_date,
                score=int(votes),
                body=body,
                accepted_answer_id=accepted,
                owner_user_id=owner,
                answer_count=len(answers),
            )
        )
        posts.extend(answers)
        return qid, accepted

    for i in range(n):
        uid = i + 1
        unres = bool(is_unres[i])
        reject = rng.beta(5, 2.5) if unres else rng.beta(1.5, 4.5)
        lad = rng.lognormal(np.log(100) if unres else np.log(18), 1.1)
        rep = rng.lognormal(np.log(150) if unres else np.log(900), 1.2)
        votes = round(rng.normal(3, 5) if unres else rng.normal(8, 6))
        n_topics_q = int(rng.integers(3, 6)) if unres else int(rng.integers(1, 3))
        topic_ids = [int(t) for t in rng.choice(config.n_topics, n_topics_q, replace=False)]

        lad_days = min(lad, 3000.0)
        users.append(UserRow(id=uid, reputation=max(1, int(rep)), last_access_date=days_before(lad_days)))

        q_date = days_before(rng.uniform(200, 2000))
        qid, accepted = add_question(
            uid, q_date, topic_ids, votes, 10 + int(rng.poisson(4)),
            accept_prob=0.0 if unres else 1.0, n_sentences=int(rng.integers(2, 5)),
        )
        if not unres and accepted is None:
            raise AssertionError("resolved target without accepted answer")
        labels[qid] = "Unresolved" if unres else "Resolved"

        for _ in range(2 + int(rng.poisson(4))):
            h_topics = [int(rng.integers(config.n_topics))]
            add_question(
                uid, days_before(rng.uniform(1, 2500)), h_topics,
                round(rng.normal(3, 3)), int(rng.integers(1, 4)),
                accept_prob=1.0 - reject, n_sentences=int(rng.integers(1, 3)),
            )

    # recent, heavily answered questions: fail only the age rule
    for _ in range(int(round(n * config.noise_fraction))):
        owner = int(rng.integers(1, n + 1))
        add_question(
            owner, days_before(rng.uniform(5, 150)), [int(rng.integers(config.n_topics))],
            round(rng.normal(4, 3)), 10 + int(rng.poisson(2)), accept_prob=0.5, n_sentences=2,
        )

    for j in range(n_answerers):
        users.append(
            UserRow(
                id=answerer_base + j,
                reputation=int(rng.lognormal(np.log(3000), 1.0)),
                last_access_date=days_before(rng.uniform(0, 30)),
            )
        )

    posts.sort(key=lambda p: p.id)
    return SynthDump(posts=posts, users=users, labels=labels)
