import math

import numpy as np
import pytest

from chorus.text import (
    EmbeddingStore,
    EntityTagger,
    classify_message_types,
    cosine_sim,
    extrema_sim,
    greedy_match_sim,
    is_generic,
    load_lexicons,
    sentiment_label,
    sentiment_score,
    tokenize,
)


@pytest.fixture(scope="module")
def lex():
    return load_lexicons()


@pytest.fixture(scope="module")
def tagger():
    return EntityTagger()


class TestTokenize:
    def test_punctuation_split(self):
        assert tokenize("Hello, world!") == ["hello", ",", "world", "!"]

    def test_contraction_split(self):
        assert tokenize("Don't stop") == ["do", "n't", "stop"]

    def test_possessive_split(self):
        assert tokenize("What's your name ?") == ["what", "'s", "your", "name", "?"]

    @pytest.mark.parametrize(
        "text",
        [
            "Hello, world!",
            "Don't stop believing.",
            "I'm sure they've left; we'll see.",
            "Mixed 123 numbers... and-dashes",
            "",
        ],
    )
    def test_idempotent_on_own_output(self, text):
        once = tokenize(text)
        assert tokenize(" ".join(once)) == once

    def test_cased_mode_keeps_case(self):
        assert tokenize("Margaret Thatcher", lower=False) == ["Margaret", "Thatcher"]


class TestEmbeddingStore:
    def small_store(self):
        return EmbeddingStore(2, {"a": np.array([1.0, 0.0]), "b": np.array([0.0, 1.0]),
                                  "c": np.array([1.0, 1.0])})

    def test_oov_zero_vector(self):
        store = self.small_store()
        assert np.array_equal(store.vector("missing"), np.zeros(2))

    def test_avg_excludes_oov(self):
        store = self.small_store()
        # mean over the two known tokens only, OOV does not dilute
        assert np.allclose(store.avg(["a", "b", "zzz"]), [0.5, 0.5])

    def test_avg_empty(self):
        store = self.small_store()
        assert np.array_equal(store.avg(["zzz"]), np.zeros(2))

    def test_load_word2vec_format(self, tmp_path):
        p = tmp_path / "vecs.txt"
        p.write_text("2 3\nfoo 1 2 3\nbar 4 5 6\n")
        store = EmbeddingStore.load(p)
        assert store.dimension == 3
        assert np.allclose(store.vector("bar"), [4, 5, 6])

    def test_load_without_header(self, tmp_path):
        p = tmp_path / "vecs.txt"
        p.write_text("foo 1 2 3\nbar 4 5 6\n")
        store = EmbeddingStore.load(p)
        assert store.dimension == 3 and len(store) == 2

    def test_load_ragged_line_rejected(self, tmp_path):
        p = tmp_path / "vecs.txt"
        p.write_text("foo 1 2 3\nbar 4 5\n")
        with pytest.raises(ValueError):
            EmbeddingStore.load(p)

    def test_hashed_store_deterministic(self):
        s1 = EmbeddingStore.hashed(16, seed=7)
        s2 = EmbeddingStore.hashed(16, seed=7)
        assert np.array_equal(s1.vector("token"), s2.vector("token"))
        assert not np.array_equal(s1.vector("token"), s1.vector("other"))


def oracle_extrema(vecs):
    dim = len(vecs[0])
    out = []
    for d in range(dim):
        best = 0.0
        for v in vecs:
            if abs(v[d]) > abs(best) or (abs(v[d]) == abs(best) and v[d] > best):
                best = v[d]
        out.append(best)
    return np.array(out)


def oracle_greedy(va, vb):
    fwd = np.mean([max(cosine_sim(x, y) for y in vb) for x in va])
    bwd = np.mean([max(cosine_sim(x, y) for x in va) for y in vb])
    return 0.5 * (fwd + bwd)


class TestSimilarity:
    def store(self):
        return EmbeddingStore(2, {"a": np.array([1.0, 0.0]), "b": np.array([0.0, 1.0]),
                                  "c": np.array([1.0, 1.0])})

    def test_cosine_known_value(self):
        got = cosine_sim(np.array([1.0, 2.0, 3.0]), np.array([4.0, 5.0, 6.0]))
        assert abs(got - 0.9746318461970762) < 1e-12

    def test_cosine_symmetric_and_bounded(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            a, b = rng.standard_normal(8), rng.standard_normal(8)
            assert cosine_sim(a, b) == pytest.approx(cosine_sim(b, a))
            assert abs(cosine_sim(a, b)) <= 1 + 1e-9

    def test_cosine_zero_norm(self):
        assert cosine_sim(np.zeros(3), np.array([1.0, 2.0, 3.0])) == 0.0

    def test_cosine_dim_mismatch(self):
        with pytest.raises(ValueError):
            cosine_sim(np.zeros(3), np.zeros(4))

    def test_extrema_frozen_values(self):
        store = self.store()
        # pooled ["a","b"] -> [1,1]; "c" -> [1,1]; cosine 1.0
        assert extrema_sim(["a", "b"], ["c"], store) == pytest.approx(1.0)
        assert extrema_sim(["a"], ["b"], store) == pytest.approx(0.0)

    def test_extrema_identical_is_one(self):
        store = self.store()
        assert extrema_sim(["a", "c"], ["a", "c"], store) == pytest.approx(1.0)

    def test_extrema_permutation_invariant(self):
        rng = np.random.default_rng(3)
        toks = [f"t{i}" for i in range(6)]
        store = EmbeddingStore(5, {t: rng.standard_normal(5) for t in toks})
        base = extrema_sim(toks, ["t0", "t3"], store)
        for _ in range(10):
            perm = list(rng.permutation(toks))
            assert extrema_sim(perm, ["t3", "t0"], store) == pytest.approx(base)

    def test_extrema_matches_oracle(self):
        rng = np.random.default_rng(4)
        toks = [f"t{i}" for i in range(8)]
        store = EmbeddingStore(6, {t: rng.standard_normal(6) for t in toks})
        a, b = toks[:5], toks[5:]
        expected = cosine_sim(
            oracle_extrema([store.vector(t) for t in a]),
            oracle_extrema([store.vector(t) for t in b]),
        )
        assert extrema_sim(a, b, store) == pytest.approx(expected)

    def test_extrema_empty_side(self):
        assert extrema_sim([], ["a"], self.store()) == 0.0

    def test_greedy_frozen_value(self):
        store = self.store()
        assert greedy_match_sim(["a", "b"], ["c"], store) == pytest.approx(
            math.sqrt(0.5), abs=1e-9
        )

    def test_greedy_identical_is_one(self):
        store = self.store()
        assert greedy_match_sim(["a", "b", "c"], ["c", "a", "b"], store) == pytest.approx(1.0)

    def test_greedy_matches_oracle(self):
        rng = np.random.default_rng(5)
        toks = [f"t{i}" for i in range(7)]
        store = EmbeddingStore(4, {t: rng.standard_normal(4) for t in toks})
        a, b = toks[:3], toks[3:]
        va = [store.vector(t) for t in a]
        vb = [store.vector(t) for t in b]
        assert greedy_match_sim(a, b, store) == pytest.approx(oracle_greedy(va, vb))


class TestEntities:
    def test_gazetteer_person_and_gpe(self, tagger):
        tags = tagger.tag("Margaret Thatcher travelled to Beijing")
        by_kind = {t.kind: t.surface for t in tags}
        assert by_kind.get("person") == "Margaret Thatcher"
        assert by_kind.get("gpe") == "Beijing"

    def test_longest_match_wins(self, tagger):
        tags = tagger.tag("They sailed down the Amazon River last year")
        surfaces = {(t.kind, t.surface) for t in tags}
        assert ("loc", "Amazon River") in surfaces
        assert ("org", "Amazon") not in surfaces

    def test_year_date(self, tagger):
        tags = tagger.tag("The earthquake happened in 1906 near the coast")
        assert any(t.kind == "date" and t.surface == "1906" for t in tags)

    def test_modal_may_is_not_a_date(self, tagger):
        tags = tagger.tag("May I ask you something")
        assert not any(t.kind == "date" for t in tags)

    def test_month_day_date(self, tagger):
        tags = tagger.tag("It opened on March 5 2011 in town")
        assert any(t.kind == "date" and t.surface == "March 5 2011" for t in tags)

    def test_norp(self, tagger):
        tags = tagger.tag("I met a Tibetan monk")
        assert any(t.kind == "norp" and t.surface == "Tibetan" for t in tags)

    def test_capitalized_fallback_person(self, tagger):
        tags = tagger.tag("Yesterday Holly Jameson gave a talk")
        assert any(t.kind == "person" and t.surface == "Holly Jameson" for t in tags)

    def test_capitalized_fallback_org_hint(self, tagger):
        tags = tagger.tag("She joined Brightwater University in the fall")
        assert any(t.kind == "org" and t.surface == "Brightwater University" for t in tags)

    def test_no_overlap_and_stability(self, tagger):
        text = "Napoleon fought near the Mediterranean Sea in 1805"
        tags = tagger.tag(text)
        for i, a in enumerate(tags):
            for b in tags[i + 1 :]:
                assert a.end <= b.start or b.end <= a.start
        assert tagger.tag(text) == tags

    def test_no_entities(self, tagger):
        assert tagger.tag("the cat sat on the mat") == ()


class TestHeuristics:
    def test_question_by_mark(self, lex):
        assert "question" in classify_message_types("is that so?", lex)

    def test_question_by_leading_wh(self, lex):
        assert "question" in classify_message_types("what happened next", lex)

    def test_wh_mid_clause_not_question(self, lex):
        # "what" only counts at a clause start
        assert "question" not in classify_message_types("i know what i saw", lex)

    def test_wh_after_comma_is_question(self, lex):
        assert "question" in classify_message_types("tell me, who did this", lex)

    def test_greeting(self, lex):
        assert "greeting" in classify_message_types("hello there", lex)

    def test_affirmative(self, lex):
        assert "affirmative" in classify_message_types("yes exactly", lex)

    def test_negative(self, lex):
        assert "negative" in classify_message_types("no thanks", lex)

    def test_request(self, lex):
        assert "request" in classify_message_types("please tell me more", lex)

    def test_politic(self, lex):
        assert "politic" in classify_message_types("the government won the election", lex)

    def test_sentiment_positive(self, lex):
        assert sentiment_label("great wonderful amazing", lex) == "positive"

    def test_sentiment_negation_flip(self, lex):
        assert sentiment_label("this is not good", lex) == "negative"
        assert sentiment_score("this is not good", lex) == pytest.approx(-0.7)

    def test_sentiment_neutral_without_polar_words(self, lex):
        assert sentiment_label("the chair is near the table", lex) == "neutral"

    def test_sentiment_negation_outside_window(self, lex):
        # negation four tokens away no longer flips
        score = sentiment_score("not the one we all wanted good", lex)
        assert score > 0

    def test_generic_short_words(self, lex):
        assert is_generic("ok", lex)

    def test_generic_stop_words(self, lex):
        assert is_generic("i am of the", lex)

    def test_generic_punctuation_only(self, lex):
        assert is_generic("...", lex)

    def test_not_generic(self, lex):
        assert not is_generic("butterflies cannot fly when cold", lex)


class TestLexiconLoading:
    def test_comments_and_blanks_skipped(self, tmp_path):
        from chorus.text.lexicons import load_wordlist

        p = tmp_path / "words.txt"
        p.write_text("# comment\n\nalpha\nBeta\n")
        assert load_wordlist(p) == frozenset({"alpha", "beta"})

    def test_polarity_parse(self, tmp_path):
        from chorus.text.lexicons import load_polarity

        p = tmp_path / "pol.txt"
        p.write_text("good\t0.7\nbad\t-0.7\n")
        assert load_polarity(p) == {"good": 0.7, "bad": -0.7}

    def test_shipped_lexicons_nonempty(self, lex):
        assert len(lex.stop_words) > 100
        assert "n't" in lex.negations
        assert "how" in lex.wh_words
