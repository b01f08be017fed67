"""Per-question featurization: every metric for every retained question."""

from __future__ import annotations

import logging
import math
import statistics
from dataclasses import dataclass
from typing import Optional

from .content import segment_html, text_stats
from .ingest import Dataset, Label
from .readability import FORMULAS, ScorerWeights, readability
from .topics import (
    TopicModel,
    answer_doc_id,
    build_corpus,
    corpus_alpha,
    doc_theta,
    question_doc_id,
    top_topics,
    topic_entropy,
    topic_similarity,
    train_lda,
)
from .users import behaviour_features

LOGGER = logging.getLogger(__name__)

EXTENDED_COLUMNS = (
    "question_id",
    "label",
    "te",
    "ts",
    "tr",
    "tr_imputed",
    *FORMULAS,
    "cr",
    "arr",
    "arr_imputed",
    "lad_days",
    "lad_log",
    "votes",
    "reputation",
    "rep_log",
)


@dataclass(frozen=True)
class LdaParams:
    K: int = 150
    iterations: int = 1000
    seed: int = 0
    hyper_alpha: Optional[float] = None
    hyper_beta: float = 0.01
    alpha_mode: str = "marginal"
    top_n: int = 5

    def matches(self, model: TopicModel) -> bool:
        alpha = self.hyper_alpha if self.hyper_alpha is not None else 50.0 / self.K
        return (
            model.K == self.K
            and model.iterations == self.iterations
            and model.seed == self.seed
            and model.hyper_alpha == alpha
            and model.hyper_beta == self.hyper_beta
        )


def fit_topics(dataset: Dataset, params: LdaParams, segments=None) -> TopicModel:
    corpus = build_corpus(dataset.threads, segments)
    LOGGER.info(
        "training LDA: %d documents, %d tokens, vocabulary %d, K=%d",
        len(corpus.documents), corpus.n_tokens, len(corpus.vocabulary), params.K,
    )
    return train_lda(
        corpus,
        K=params.K,
        hyper_alpha=params.hyper_alpha,
        hyper_beta=params.hyper_beta,
        iterations=params.iterations,
        seed=params.seed,
    )


def model_fits_dataset(model: TopicModel, dataset: Dataset) -> bool:
    ids = set(model.doc_ids)
    for t in dataset.threads:
        if question_doc_id(t.id) not in ids:
            return False
        a = t.topic_answer()
        if a is not None and answer_doc_id(a.id) not in ids:
            return False
    return len(ids) == len(model.doc_ids)


def featurize(
    dataset: Dataset,
    model: TopicModel,
    params: LdaParams = LdaParams(),
    cr_weights: Optional[ScorerWeights] = None,
) -> list[dict]:
    """One record per question, ordered by question id.

    ARR is NaN when the owner has no other answered question; the learner
    imputes it per fold. An undefined TR is replaced by the median of the
    defined ones.
    """
    analysis_date = dataset.criteria.analysis_date
    alpha = corpus_alpha(model, params.alpha_mode)
    doc_pos = {doc_id: i for i, doc_id in enumerate(model.doc_ids)}
    records = []
    for t in sorted(dataset.threads, key=lambda t: t.id):
        q_seg = segment_html(t.question.body)
        read = readability(text_stats(q_seg.prose), q_seg.code_blocks, cr_weights)

        q_theta = doc_theta(model, doc_pos[question_doc_id(t.id)])
        top = top_topics(q_theta, params.top_n)
        answer = t.topic_answer()
        if answer is not None:
            a_theta = doc_theta(model, doc_pos[answer_doc_id(answer.id)])
            ts = topic_similarity(q_theta, a_theta, alpha, top)
        else:
            ts = math.nan

        beh = behaviour_features(t.owner, t.id, t.question.score, analysis_date)
        rec = {
            "question_id": t.id,
            "label": t.label.value,
            "te": topic_entropy(q_theta, alpha, top),
            "ts": ts,
            "tr": read.tr_grade if read.tr_grade is not None else math.nan,
            "tr_imputed": 0,
            "cr": read.cr_score if read.cr_score is not None else math.nan,
            "arr": beh.arr,
            "arr_imputed": int(beh.arr_imputed),
            "lad_days": beh.lad_days,
            "lad_log": beh.log_lad,
            "votes": beh.votes,
            "reputation": t.owner.reputation,
            "rep_log": beh.log_reputation,
        }
        for name, grade in read.grades.items():
            rec[name] = grade if grade is not None else math.nan
        records.append(rec)

    defined_tr = [r["tr"] for r in records if not math.isnan(r["tr"])]
    if defined_tr:
        median_tr = statistics.median(defined_tr)
        for r in records:
            if math.isnan(r["tr"]):
                r["tr"] = median_tr
                r["tr_imputed"] = 1
    return records


def labels_of(dataset: Dataset) -> dict[int, Label]:
    return {t.id: t.label for t in dataset.threads}
