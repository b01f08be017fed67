import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from unresolved_qa.content import TextStats
from unresolved_qa.readability import (
    ConfigError,
    CodeFeatureVector,
    ScorerWeights,
    ari,
    average_grade,
    code_features,
    code_readability,
    coleman_liau,
    default_weights,
    flesch_kincaid,
    gunning_fog,
    parse_weights,
    readability,
    smog,
)


def stats(words=0, sentences=0, syllables=0, complex_words=0, letters=0, chars=0):
    return TextStats(sentences=sentences, words=words, syllables=syllables,
                     complex_words=complex_words, letters=letters, chars=chars)


class TestFormulaExamples:
    def test_flesch_kincaid(self):
        assert flesch_kincaid(stats(words=9, sentences=1, syllables=11)) == pytest.approx(2.3422, abs=1e-4)
        assert flesch_kincaid(stats(words=10, sentences=1, syllables=15)) == pytest.approx(6.01, abs=1e-9)
        assert flesch_kincaid(stats(words=0, sentences=1)) is None

    def test_gunning_fog(self):
        assert gunning_fog(stats(words=100, sentences=10, complex_words=10)) == pytest.approx(8.0)
        assert gunning_fog(stats(words=7, sentences=7)) == pytest.approx(0.4)
        assert gunning_fog(stats(words=0, sentences=3)) is None

    def test_coleman_liau(self):
        assert coleman_liau(stats(words=100, sentences=5, letters=450)) == pytest.approx(9.18, abs=1e-9)
        assert coleman_liau(stats(words=0)) is None
        assert coleman_liau(stats(words=1)) == pytest.approx(-15.8)

    def test_smog(self):
        assert smog(stats(complex_words=30, sentences=30)) == pytest.approx(8.8418, abs=1e-4)
        assert smog(stats(sentences=4, words=4)) == pytest.approx(3.1291)
        assert smog(stats(complex_words=3)) is None

    def test_ari(self):
        assert ari(stats(chars=35, words=9, sentences=1)) == pytest.approx(1.3867, abs=1e-4)
        assert ari(stats(words=1, sentences=1)) == pytest.approx(-20.93)
        assert ari(stats(sentences=1)) is None


class TestAverageGrade:
    def test_mean(self):
        assert average_grade([2, 4, 6, 8, 10]) == 6

    def test_mean_of_defined(self):
        assert average_grade([2, 4, 6, 8, None]) == 5

    def test_all_undefined(self):
        assert average_grade([None] * 5) is None


@st.composite
def positive_stats(draw):
    w = draw(st.integers(1, 5000))
    return stats(
        words=w,
        sentences=draw(st.integers(1, 500)),
        syllables=draw(st.integers(w, 4 * w)),
        complex_words=draw(st.integers(0, w)),
        letters=draw(st.integers(w, 12 * w)),
        chars=draw(st.integers(w, 12 * w)),
    )


@given(positive_stats(), st.integers(2, 9))
def test_length_ratios_scale_invariant(s, k):
    scaled = stats(words=s.words * k, sentences=s.sentences * k, syllables=s.syllables * k,
                   complex_words=s.complex_words * k, letters=s.letters * k, chars=s.chars * k)
    for f in (flesch_kincaid, gunning_fog, coleman_liau, smog, ari):
        assert f(scaled) == pytest.approx(f(s), rel=1e-9, abs=1e-9)


class TestCodeFeatures:
    def test_single_line(self):
        f = code_features(["x=1;"])
        assert f.avg_line_length == 4
        assert f.identifiers_per_line == 1
        assert f.numbers_per_line == 1
        assert not f.empty

    def test_empty(self):
        f = code_features([])
        assert f.empty
        assert f.values() == (0.0,) * 10
        assert code_features(["", "   "]).empty

    def test_blank_fraction(self):
        assert code_features(["a = b\n"]).blank_line_fraction == 0.0
        assert code_features(["a = b\n\nc"]).blank_line_fraction == pytest.approx(1 / 3)
        assert code_features(["x = 1\n   "]).blank_line_fraction == 0.5

    def test_keywords_and_branching(self):
        f = code_features(["if (ready) {\n\treturn count;\n}"])
        assert f.keywords_per_line == pytest.approx(2 / 3)
        assert f.branching_tokens_per_line == pytest.approx(1 / 3)
        assert f.identifiers_per_line == pytest.approx(2 / 3)
        assert f.avg_indentation == pytest.approx(4 / 3)

    def test_comments(self):
        f = code_features(["x = 1 // set\n# note\ny = 2"])
        assert f.comments_per_line == pytest.approx(2 / 3)

    @given(st.lists(st.text(max_size=60), max_size=4))
    def test_invariants(self, blocks):
        f = code_features(blocks)
        assert all(v >= 0 for v in f.values())
        assert 0.0 <= f.blank_line_fraction <= 1.0


def zero_weights(bias=0.0):
    return ScorerWeights(bias=bias, weights=(1.0,) * 10, means=(0.0,) * 10, scales=(1.0,) * 10)


class TestCodeReadability:
    def test_sigmoid_zero(self):
        assert code_readability((0.0,) * 10, zero_weights()) == 0.5

    def test_huge_bias_stays_inside_unit_interval(self):
        for b in (1e300, -1e300):
            p = code_readability((0.0,) * 10, zero_weights(bias=b))
            assert 0.0 < p < 1.0

    def test_default_weights_direct_oracle(self):
        w = default_weights()
        feats = code_features(["for (int i = 0; i < n; i++) {\n    total += values[i];\n}\n"])
        logit = w.bias
        for name, v, wt, m, s in zip(CodeFeatureVector.names(), feats.values(), w.weights, w.means, w.scales):
            logit += wt * (v - m) / s
        assert code_readability(feats) == pytest.approx(1 / (1 + math.exp(-logit)), rel=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ConfigError):
            code_readability((0.0,) * 9, zero_weights())
        with pytest.raises(ConfigError):
            ScorerWeights(bias=0, weights=(1.0,) * 9, means=(0.0,) * 10, scales=(1.0,) * 10)

    def test_config_parse_errors(self):
        with pytest.raises(ConfigError, match="missing"):
            parse_weights("bias = 1")
        with pytest.raises(ConfigError, match="bad number"):
            parse_weights("bias = one")

    def test_no_code_means_no_score(self):
        r = readability(stats(words=9, sentences=1, syllables=11, letters=35, chars=35), [])
        assert r.cr_score is None
        assert r.tr_grade is not None


def test_formulas_against_exact_arithmetic():
    # exact rational evaluation is an independent path from the float code
    import random

    rnd = random.Random(3)
    for _ in range(25):
        w, s = rnd.randint(1, 999), rnd.randint(1, 99)
        syl, cx, le, ch = rnd.randint(w, 3 * w), rnd.randint(0, w), rnd.randint(w, 8 * w), rnd.randint(w, 8 * w)
        st_ = stats(words=w, sentences=s, syllables=syl, complex_words=cx, letters=le, chars=ch)
        W, S = Fraction(w), Fraction(s)
        fk = Fraction("0.39") * W / S + Fraction("11.8") * syl / W - Fraction("15.59")
        gf = Fraction("0.4") * (W / S + 100 * Fraction(cx) / W)
        cl = Fraction("0.0588") * 100 * Fraction(le) / W - Fraction("0.296") * 100 * S / W - Fraction("15.8")
        ar = Fraction("4.71") * ch / W + Fraction("0.5") * W / S - Fraction("21.43")
        sm = 1.0430 * math.sqrt(float(Fraction(cx * 30, s))) + 3.1291
        assert flesch_kincaid(st_) == pytest.approx(float(fk), rel=1e-9, abs=1e-12)
        assert gunning_fog(st_) == pytest.approx(float(gf), rel=1e-9, abs=1e-12)
        assert coleman_liau(st_) == pytest.approx(float(cl), rel=1e-9, abs=1e-12)
        assert ari(st_) == pytest.approx(float(ar), rel=1e-9, abs=1e-12)
        assert smog(st_) == pytest.approx(sm, rel=1e-9)
