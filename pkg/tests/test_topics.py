import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unresolved_qa.topics import (
    TopicModel,
    TopicModelError,
    build_corpus,
    corpus_alpha,
    corpus_from_tokens,
    doc_theta,
    load_model,
    top_topics,
    topic_entropy,
    topic_similarity,
    train_lda,
)


def model_from_counts(ndk, hyper_alpha=0.5, nkw=None):
    ndk = np.asarray(ndk, dtype=np.int64)
    K = ndk.shape[1]
    if nkw is None:
        nkw = np.zeros((K, 1), dtype=np.int64)
        nkw[:, 0] = ndk.sum(axis=0)
    return TopicModel(K=K, hyper_alpha=hyper_alpha, hyper_beta=0.01, seed=0, iterations=1,
                      vocabulary=("w",), doc_ids=[f"d{i}" for i in range(len(ndk))],
                      doc_topic_counts=ndk, topic_word_counts=np.asarray(nkw))


def cosine_oracle(q, a, alpha, idx):
    qv = np.array([alpha[i] * q[i] for i in idx])
    av = np.array([alpha[i] * a[i] for i in idx])
    nq, na = np.linalg.norm(qv), np.linalg.norm(av)
    return 0.0 if nq == 0 or na == 0 else float(qv @ av / (nq * na))


def entropy_oracle(q, alpha, idx):
    p = np.array([alpha[i] * q[i] for i in idx])
    p = p[p > 0]
    return float(-(p * np.log(p)).sum())


class TestCorpus:
    def test_counts_and_shared_vocabulary(self):
        c = corpus_from_tokens([["cat", "dog"], ["cat"], ["fish"], []])
        assert len(c.documents) == 4
        assert c.vocabulary == ("cat", "dog", "fish")
        assert c.n_tokens == 4

    def test_empty_vocabulary_rejected(self):
        with pytest.raises(TopicModelError):
            corpus_from_tokens([[], []])

    def test_build_from_threads_uses_prose_only(self):
        from conftest import answer, question, user
        from unresolved_qa.ingest import link_threads

        posts = [question(1, accepted=2, body="<p>Parse yaml config</p><pre><code>secretcode()\nmore()</code></pre>"),
                 answer(2, 1, body="<p>Use yaml loader</p>"), answer(3, 1, score=9, body="<p>ignored</p>"),
                 question(4, body="<p>Sort arrays</p>"), answer(5, 4, body="<p>numpy arrays sort</p>")]
        threads = link_threads(posts, [user(1)])
        c = build_corpus(threads)
        assert c.doc_ids == ["q1", "a2", "q4", "a5"]
        assert set(c.vocabulary) == {"parse", "yaml", "config", "use", "loader", "sort", "arrays", "numpy"}
        assert "secretcode" not in c.vocabulary


class TestTheta:
    def test_empty_document_prior_only(self):
        m = model_from_counts([[0, 0, 0, 0], [3, 1, 0, 0]], hyper_alpha=0.5)
        np.testing.assert_allclose(doc_theta(m, 0), [0.25] * 4)

    def test_fixture_counts(self):
        m = model_from_counts([[3, 1]], hyper_alpha=0.5)
        np.testing.assert_allclose(doc_theta(m, 0), [0.7, 0.3])

    def test_single_topic(self):
        m = model_from_counts([[4], [0]])
        np.testing.assert_allclose(doc_theta(m, 0), [1.0])

    def test_alpha(self):
        np.testing.assert_allclose(corpus_alpha(model_from_counts([[6, 3, 1]])), [0.6, 0.3, 0.1])
        np.testing.assert_allclose(corpus_alpha(model_from_counts([[5, 0, 0], [2, 0, 0]])), [1, 0, 0])
        np.testing.assert_allclose(corpus_alpha(model_from_counts([[2, 2, 2, 2]])), [0.25] * 4)
        np.testing.assert_allclose(corpus_alpha(model_from_counts([[6, 3, 1]]), mode="prior"), [1 / 3] * 3)
        with pytest.raises(ValueError):
            corpus_alpha(model_from_counts([[1]]), mode="bogus")


class TestTopTopics:
    def test_order(self):
        assert top_topics([0.1, 0.5, 0.4], n=2) == [(1, 0.5), (2, 0.4)]

    def test_tie_to_lower_index(self):
        assert [k for k, _ in top_topics([0.3, 0.1, 0.2, 0.3, 0.1], n=2)] == [0, 3]

    def test_clamp(self):
        assert len(top_topics([0.2, 0.3, 0.5], n=5)) == 3


class TestSimilarityAndEntropy:
    def test_pinned_similarity(self):
        alpha, q, a = (0.3, 0.2, 0.1), (0.5, 0.3, 0.2), (0.2, 0.3, 0.5)
        assert topic_similarity(q, a, alpha, top_topics(q)) == pytest.approx(0.8482, abs=1e-4)

    def test_identical_vectors(self):
        q = (0.6, 0.3, 0.1)
        assert topic_similarity(q, q, (0.2, 0.5, 0.3), top_topics(q)) == pytest.approx(1.0)

    def test_answer_zero_on_top_topics(self):
        q = (0.7, 0.3, 0.0)
        assert topic_similarity(q, (0.0, 0.0, 1.0), (0.4, 0.4, 0.2), top_topics(q, n=2)) == 0.0

    def test_empty_top_rejected(self):
        with pytest.raises(ValueError):
            topic_similarity((1.0,), (1.0,), (1.0,), [])

    def test_pinned_entropy(self):
        top = [(0, 1.0), (1, 1.0), (2, 1.0)]
        assert topic_entropy((0.15, 0.06, 0.02), (1.0, 1.0, 1.0), top) == pytest.approx(0.5316, abs=1e-4)
        assert topic_entropy((1.0,), (1.0,), [(0, 1.0)]) == 0.0
        five = [(k, 0.2) for k in range(5)]
        assert topic_entropy([0.2] * 5, [1.0] * 5, five) == pytest.approx(math.log(5), abs=1e-12)

    def test_zero_product_contributes_nothing(self):
        assert topic_entropy((0.5, 0.0), (1.0, 1.0), [(0, 0.5), (1, 0.0)]) == pytest.approx(-0.5 * math.log(0.5))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 12), st.integers(0, 2**31), st.floats(0.01, 100))
    def test_symmetry_scale_and_oracles(self, K, seed, c):
        rng = np.random.default_rng(seed)
        q, a, alpha = rng.dirichlet(np.ones(K)), rng.dirichlet(np.ones(K)), rng.dirichlet(np.ones(K))
        top = top_topics(q)
        idx = [k for k, _ in top]
        ts = topic_similarity(q, a, alpha, top)
        assert ts == pytest.approx(topic_similarity(a, q, alpha, top), rel=1e-12)
        assert ts == pytest.approx(topic_similarity(q, a, alpha * c, top), rel=1e-9)
        assert ts == pytest.approx(cosine_oracle(q, a, alpha, idx), rel=1e-9)
        assert 0.0 <= ts <= 1.0 + 1e-12
        te = topic_entropy(q, alpha, top)
        assert te == pytest.approx(entropy_oracle(q, alpha, idx), rel=1e-9, abs=1e-15)
        assert te >= 0


def two_topic_corpus(n_docs=40, length=30, seed=1):
    rng = np.random.default_rng(seed)
    words_a, words_b = [f"alpha{i}" for i in range(10)], [f"beta{i}" for i in range(10)]
    docs = [list(rng.choice(words_a if d % 2 == 0 else words_b, length)) for d in range(n_docs)]
    return corpus_from_tokens(docs)


class TestTraining:
    def test_deterministic(self):
        c = two_topic_corpus()
        m1 = train_lda(c, K=3, iterations=20, seed=5)
        m2 = train_lda(c, K=3, iterations=20, seed=5)
        assert np.array_equal(m1.doc_topic_counts, m2.doc_topic_counts)
        assert np.array_equal(m1.topic_word_counts, m2.topic_word_counts)

    def test_single_topic(self):
        m = train_lda(two_topic_corpus(n_docs=4), K=1, iterations=2)
        for d in range(4):
            np.testing.assert_allclose(doc_theta(m, d), [1.0])

    def test_separates_disjoint_vocabularies(self):
        m = train_lda(two_topic_corpus(), K=2, hyper_alpha=0.1, iterations=100, seed=0)
        for k in range(2):
            row = m.topic_word_counts[k]
            a_share = row[[m.vocabulary.index(f"alpha{i}") for i in range(10)]].sum() / row.sum()
            assert max(a_share, 1 - a_share) >= 0.9

    def test_counts_conserved_every_sweep(self):
        c = two_topic_corpus(n_docs=10, length=12)
        doc_len = np.array([len(d) for d in c.documents])
        word_tot = np.bincount(np.concatenate(c.documents), minlength=len(c.vocabulary))

        def check(sweep, ndk, nkw, z):
            assert (ndk >= 0).all() and (nkw >= 0).all()
            assert np.array_equal(ndk.sum(axis=1), doc_len)
            assert np.array_equal(nkw.sum(axis=0), word_tot)
            assert np.array_equal(np.bincount(z, minlength=ndk.shape[1]), nkw.sum(axis=1))

        train_lda(c, K=4, iterations=15, on_sweep=check)

    @pytest.mark.parametrize("kwargs", [{"K": 0}, {"K": 10**6}, {"iterations": 0}, {"hyper_beta": 0.0}])
    def test_errors(self, kwargs):
        with pytest.raises(TopicModelError):
            train_lda(two_topic_corpus(n_docs=2, length=5), **kwargs)

    def test_default_hyper_alpha(self):
        assert train_lda(two_topic_corpus(n_docs=2, length=5), K=5, iterations=1).hyper_alpha == 10.0

    def test_save_load_round_trip(self, tmp_path):
        from unresolved_qa.topics import save_model

        m = train_lda(two_topic_corpus(n_docs=6, length=8), K=3, iterations=5, seed=2)
        path = tmp_path / "model.txt"
        save_model(m, path)
        back = load_model(path)
        assert back.vocabulary == m.vocabulary and back.doc_ids == m.doc_ids
        assert (back.K, back.hyper_alpha, back.hyper_beta, back.seed, back.iterations) == (
            m.K, m.hyper_alpha, m.hyper_beta, m.seed, m.iterations)
        assert np.array_equal(back.doc_topic_counts, m.doc_topic_counts)
        assert np.array_equal(back.topic_word_counts, m.topic_word_counts)

    def test_load_rejects_garbage(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("not a model\n")
        with pytest.raises(TopicModelError):
            load_model(path)
