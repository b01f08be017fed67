"""LDA by collapsed Gibbs sampling, and the topic metrics built on it.

Questions and their paired answers form the corpus. After training, each
question gets a topic similarity to its answer and a topic entropy, both
restricted to the question's five dominant topics and weighted by the
corpus-level topic proportions.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

import numpy as np
from numba import njit

from .content import ContentSegments, normalize_for_topics, segment_html
from .io import atomic_write_text

LOGGER = logging.getLogger(__name__)

MODEL_MAGIC = "# unresolved-qa lda model v1"


class TopicModelError(ValueError):
    pass


@dataclass
class Corpus:
    vocabulary: tuple[str, ...]
    documents: list[np.ndarray]
    doc_ids: list[str]
    index: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.index:
            self.index = {w: i for i, w in enumerate(self.vocabulary)}

    @property
    def n_tokens(self) -> int:
        return int(sum(len(d) for d in self.documents))

    def doc_index(self, doc_id: str) -> int:
        return self.doc_ids.index(doc_id)


def question_doc_id(question_id: int) -> str:
    return f"q{question_id}"


def answer_doc_id(answer_id: int) -> str:
    return f"a{answer_id}"


def corpus_from_tokens(docs: Sequence[Sequence[str]], doc_ids: Optional[Sequence[str]] = None) -> Corpus:
    """Index token lists; words are numbered in order of first appearance."""
    index: dict[str, int] = {}
    encoded = []
    for doc in docs:
        ids = [index.setdefault(tok, len(index)) for tok in doc]
        encoded.append(np.asarray(ids, dtype=np.int64))
    if not index:
        raise TopicModelError("empty vocabulary: nothing to train on")
    if doc_ids is None:
        doc_ids = [str(i) for i in range(len(docs))]
    return Corpus(vocabulary=tuple(index), documents=encoded, doc_ids=list(doc_ids), index=index)


def build_corpus(
    threads: Iterable,
    segments: Optional[Mapping[int, ContentSegments]] = None,
) -> Corpus:
    """One document per question and one per its topic answer.

    The topic answer is the accepted answer of a resolved question and the
    most up-voted answer otherwise. Only prose is used; code blocks are left
    out of topic documents.
    """
    docs: list[list[str]] = []
    ids: list[str] = []

    def prose(post) -> str:
        seg = segments.get(post.id) if segments is not None else None
        return (seg if seg is not None else segment_html(post.body)).prose

    threads = list(threads)
    if not threads:
        raise TopicModelError("dataset is empty")
    for t in threads:
        docs.append(normalize_for_topics(prose(t.question)))
        ids.append(question_doc_id(t.id))
        answer = t.topic_answer()
        if answer is not None:
            docs.append(normalize_for_topics(prose(answer)))
            ids.append(answer_doc_id(answer.id))
    return corpus_from_tokens(docs, ids)


@dataclass
class TopicModel:
    K: int
    hyper_alpha: float
    hyper_beta: float
    seed: int
    iterations: int
    vocabulary: tuple[str, ...]
    doc_ids: list[str]
    doc_topic_counts: np.ndarray  # D x K
    topic_word_counts: np.ndarray  # K x V

    @property
    def topic_counts(self) -> np.ndarray:
        return self.topic_word_counts.sum(axis=1)

    def doc_index(self, doc_id: str) -> int:
        try:
            return self.doc_ids.index(doc_id)
        except ValueError:
            raise KeyError(doc_id) from None


@njit(cache=True)
def _gibbs_sweep(tokens, doc_of, z, ndk, nkw, nk, alpha, beta, vbeta, uniforms, cum):
    K = nk.shape[0]
    for i in range(tokens.shape[0]):
        w = tokens[i]
        d = doc_of[i]
        k = z[i]
        ndk[d, k] -= 1
        nkw[k, w] -= 1
        nk[k] -= 1
        total = 0.0
        for t in range(K):
            total += (ndk[d, t] + alpha) * (nkw[t, w] + beta) / (nk[t] + vbeta)
            cum[t] = total
        u = uniforms[i] * total
        new = K - 1
        for t in range(K):
            if u < cum[t]:
                new = t
                break
        z[i] = new
        ndk[d, new] += 1
        nkw[new, w] += 1
        nk[new] += 1


def train_lda(
    corpus: Corpus,
    K: int = 150,
    hyper_alpha: Optional[float] = None,
    hyper_beta: float = 0.01,
    iterations: int = 1000,
    seed: int = 0,
    on_sweep: Optional[Callable[[int, np.ndarray, np.ndarray, np.ndarray], None]] = None,
) -> TopicModel:
    """Collapsed Gibbs sampling with symmetric Dirichlet priors.

    Each sweep resamples every token's topic from
    ``(n_dk + a) * (n_kw + b) / (n_k + V b)`` with the token's own assignment
    removed. ``hyper_alpha`` defaults to ``50 / K``. Random draws come from a
    single seeded generator, so equal inputs give identical counts.
    ``on_sweep(sweep, doc_topic, topic_word, assignments)`` is called after
    every sweep with the live arrays (do not modify them).
    """
    if K < 1:
        raise TopicModelError("K must be >= 1")
    if iterations < 1:
        raise TopicModelError("iterations must be >= 1")
    n_tokens = corpus.n_tokens
    if n_tokens == 0:
        raise TopicModelError("corpus has no tokens")
    if K > n_tokens:
        raise TopicModelError(f"K={K} exceeds the {n_tokens} tokens in the corpus")
    if hyper_alpha is None:
        hyper_alpha = 50.0 / K
    if hyper_alpha <= 0 or hyper_beta <= 0:
        raise TopicModelError("Dirichlet hyperparameters must be positive")

    V = len(corpus.vocabulary)
    D = len(corpus.documents)
    tokens = np.concatenate([d for d in corpus.documents if len(d)]).astype(np.int64)
    doc_of = np.repeat(np.arange(D, dtype=np.int64), [len(d) for d in corpus.documents])

    rng = np.random.default_rng(seed)
    z = rng.integers(0, K, size=n_tokens).astype(np.int64)
    ndk = np.zeros((D, K), dtype=np.int64)
    nkw = np.zeros((K, V), dtype=np.int64)
    np.add.at(ndk, (doc_of, z), 1)
    np.add.at(nkw, (z, tokens), 1)
    nk = nkw.sum(axis=1)
    cum = np.empty(K, dtype=np.float64)

    for sweep in range(iterations):
        uniforms = rng.random(n_tokens)
        _gibbs_sweep(tokens, doc_of, z, ndk, nkw, nk, float(hyper_alpha),
                     float(hyper_beta), float(V * hyper_beta), uniforms, cum)
        if on_sweep is not None:
            on_sweep(sweep, ndk, nkw, z)

    return TopicModel(
        K=K,
        hyper_alpha=float(hyper_alpha),
        hyper_beta=float(hyper_beta),
        seed=seed,
        iterations=iterations,
        vocabulary=corpus.vocabulary,
        doc_ids=list(corpus.doc_ids),
        doc_topic_counts=ndk,
        topic_word_counts=nkw,
    )


def doc_theta(model: TopicModel, doc: int) -> np.ndarray:
    counts = model.doc_topic_counts[doc]
    return (counts + model.hyper_alpha) / (counts.sum() + model.K * model.hyper_alpha)


def corpus_alpha(model: TopicModel, mode: str = "marginal") -> np.ndarray:
    """Corpus-level topic weights.

    ``marginal``: share of all tokens assigned to each topic.
    ``prior``: the normalized symmetric Dirichlet prior (uniform).
    """
    if mode == "marginal":
        totals = model.doc_topic_counts.sum(axis=0).astype(np.float64)
        return totals / totals.sum()
    if mode == "prior":
        return np.full(model.K, 1.0 / model.K)
    raise ValueError(f"unknown alpha mode {mode!r}")


def top_topics(theta: Sequence[float], n: int = 5) -> list[tuple[int, float]]:
    """The ``n`` largest entries, descending, ties to the lower index."""
    order = sorted(range(len(theta)), key=lambda k: (-theta[k], k))
    return [(k, float(theta[k])) for k in order[:n]]


def topic_similarity(q_theta, a_theta, alpha, q_top: Sequence[tuple[int, float]]) -> float:
    """Weighted cosine between question and answer over the question's top topics."""
    if not q_top:
        raise ValueError("q_top is empty")
    idx = [k for k, _ in q_top]
    q = [alpha[k] * q_theta[k] for k in idx]
    a = [alpha[k] * a_theta[k] for k in idx]
    qn = math.sqrt(sum(x * x for x in q))
    an = math.sqrt(sum(x * x for x in a))
    if qn == 0.0 or an == 0.0:
        return 0.0
    return sum(x * y for x, y in zip(q, a)) / (qn * an)


def topic_entropy(q_theta, alpha, q_top: Sequence[tuple[int, float]]) -> float:
    """``-sum p log p`` over weighted top-topic probabilities, natural log."""
    te = 0.0
    for k, _ in q_top:
        p = alpha[k] * q_theta[k]
        if p > 0.0:
            te -= p * math.log(p)
    return te


# --- persistence --------------------------------------------------------------


def model_lines(model: TopicModel) -> Iterable[str]:
    yield MODEL_MAGIC
    yield f"K {model.K}"
    yield f"V {len(model.vocabulary)}"
    yield f"D {len(model.doc_ids)}"
    yield f"alpha {model.hyper_alpha!r}"
    yield f"beta {model.hyper_beta!r}"
    yield f"seed {model.seed}"
    yield f"iterations {model.iterations}"
    yield "[vocabulary]"
    yield from model.vocabulary
    yield "[documents]"
    yield from model.doc_ids
    yield "[doc_topic]"
    for d, k in zip(*np.nonzero(model.doc_topic_counts)):
        yield f"{d} {k} {model.doc_topic_counts[d, k]}"
    yield "[topic_word]"
    for k, w in zip(*np.nonzero(model.topic_word_counts)):
        yield f"{k} {w} {model.topic_word_counts[k, w]}"


def save_model(model: TopicModel, path: Union[str, Path]) -> None:
    atomic_write_text(path, "\n".join(model_lines(model)) + "\n")


def load_model(path: Union[str, Path]) -> TopicModel:
    lines = Path(path).read_text("utf-8").split("\n")
    if not lines or lines[0] != MODEL_MAGIC:
        raise TopicModelError(f"{path}: not a topic model file")
    header = {}
    i = 1
    while not lines[i].startswith("["):
        key, value = lines[i].split(" ", 1)
        header[key] = value
        i += 1
    K, V, D = int(header["K"]), int(header["V"]), int(header["D"])

    def section(name, count=None):
        nonlocal i
        if lines[i] != f"[{name}]":
            raise TopicModelError(f"{path}: expected [{name}] at line {i + 1}")
        i += 1
        start = i
        if count is None:
            while i < len(lines) and not lines[i].startswith("["):
                i += 1
        else:
            i += count
        return [ln for ln in lines[start:i] if count is not None or ln]

    vocab = tuple(section("vocabulary", V))
    doc_ids = section("documents", D)
    ndk = np.zeros((D, K), dtype=np.int64)
    for ln in section("doc_topic"):
        d, k, c = map(int, ln.split())
        ndk[d, k] = c
    nkw = np.zeros((K, V), dtype=np.int64)
    for ln in section("topic_word"):
        k, w, c = map(int, ln.split())
        nkw[k, w] = c
    if ndk.sum() != nkw.sum():
        raise TopicModelError(f"{path}: inconsistent count matrices")
    return TopicModel(
        K=K,
        hyper_alpha=float(header["alpha"]),
        hyper_beta=float(header["beta"]),
        seed=int(header["seed"]),
        iterations=int(header["iterations"]),
        vocabulary=vocab,
        doc_ids=doc_ids,
        doc_topic_counts=ndk,
        topic_word_counts=nkw,
    )
