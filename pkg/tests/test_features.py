import numpy as np
import pytest

from chorus.core import Article, ConversationState, Message, Speaker
from chorus.features import FeatureExtractor
from chorus.text import EmbeddingStore, EntityTagger, load_lexicons


@pytest.fixture(scope="module")
def extractor():
    store = EmbeddingStore.hashed(16, seed=1)
    return FeatureExtractor(store, load_lexicons(), EntityTagger())


def make_state(history, article_text="Napoleon fought in Russia. The winter was brutal. Many died."):
    art = Article(article_id="a1", text=article_text)
    return ConversationState(conversation_id="c1", article=art, history=tuple(history))


BASE_HISTORY = (
    Message(Speaker.BOT, "Hello! Let us talk about the article.", 0),
    Message(Speaker.HUMAN, "what do you know about Napoleon ?", 1),
)


class TestLayout:
    def test_dimension_matches_manifest(self, extractor):
        # 3 embedding blocks + 48 scalar slots
        assert extractor.dimension == 3 * 16 + 48
        last = extractor.manifest()[-1]
        assert last.start + last.length == extractor.dimension

    def test_manifest_is_contiguous_and_stable(self, extractor):
        blocks = extractor.manifest()
        offset = 0
        for b in blocks:
            assert b.start == offset
            offset += b.length
        again = FeatureExtractor(
            EmbeddingStore.hashed(16, seed=1), load_lexicons(), EntityTagger()
        )
        assert again.manifest_dict() == extractor.manifest_dict()

    def test_full_size_dimension(self):
        # at the default embedding width the vector is 948 wide
        store = EmbeddingStore.hashed(300)
        ex = FeatureExtractor(store, load_lexicons(), EntityTagger())
        assert ex.dimension == 948


class TestExtraction:
    def test_empty_candidate_rejected(self, extractor):
        state = make_state(BASE_HISTORY)
        with pytest.raises(ValueError):
            extractor.extract(state, "   ")

    def test_deterministic(self, extractor):
        state = make_state(BASE_HISTORY)
        a = extractor.extract(state, "Napoleon lost the war in Russia.")
        b = extractor.extract(state, "Napoleon lost the war in Russia.")
        assert np.array_equal(a.values, b.values)

    def test_word_overlap_counts(self, extractor):
        state = make_state(BASE_HISTORY)
        fv = extractor.extract(state, "Napoleon fought the winter")
        # candidate shares {napoleon, fought, winter} with the article
        assert fv.block("overlap_candidate_article")[0] == 3.0
        # and {napoleon} with the context
        assert fv.block("overlap_candidate_context")[0] == 1.0

    def test_bigram_overlap(self, extractor):
        state = make_state(BASE_HISTORY)
        fv = extractor.extract(state, "Napoleon fought in Russia today")
        # "napoleon fought", "fought in", "in russia" appear in the article
        assert fv.block("overlap_candidate_article")[1] == 3.0

    def test_entity_overlap(self, extractor):
        state = make_state(BASE_HISTORY)
        fv = extractor.extract(state, "Napoleon ended up in Russia")
        assert fv.block("overlap_candidate_article")[3] == 2.0

    def test_context_length_counts_messages(self, extractor):
        state = make_state(BASE_HISTORY)
        fv = extractor.extract(state, "something relevant")
        assert fv.block("context_length")[0] == 2.0

    def test_article_sentence_count(self, extractor):
        state = make_state(BASE_HISTORY)
        fv = extractor.extract(state, "something relevant")
        assert fv.block("article_sentence_count")[0] == 3.0

    def test_word_counts_ignore_punctuation(self, extractor):
        state = make_state(BASE_HISTORY)
        fv = extractor.extract(state, "well , that is nice !")
        assert fv.block("word_count_candidate")[0] == 4.0
        # last user message: "what do you know about Napoleon ?" -> 6 words
        assert fv.block("word_count_last_user")[0] == 6.0

    def test_generic_flags(self, extractor):
        state = make_state(
            BASE_HISTORY[:1] + (Message(Speaker.HUMAN, "ok", 1),)
        )
        fv = extractor.extract(state, "it is so")
        assert fv.block("generic_flags").tolist() == [1.0, 1.0]

    def test_category_flags_candidate(self, extractor):
        state = make_state(BASE_HISTORY)
        fv = extractor.extract(state, "what the hell is really not clear")
        flags = fv.block("word_category_candidate")
        # wh prefix, intensifier (really), profanity (hell), negation (not)
        assert flags.tolist() == [1.0, 1.0, 0.0, 1.0, 1.0]

    def test_type_flags_last_user_question(self, extractor):
        state = make_state(BASE_HISTORY)
        fv = extractor.extract(state, "a plain statement")
        types = fv.block("types_last_user")
        # MESSAGE_TYPES order: greeting, question, affirmative, negative, request, politic
        assert types[1] == 1.0

    def test_sentiment_one_hot(self, extractor):
        state = make_state(BASE_HISTORY)
        fv = extractor.extract(state, "this is a great wonderful thing")
        assert fv.block("sentiment_candidate").tolist() == [0.0, 0.0, 1.0]

    def test_no_user_message_zeroes_user_blocks(self, extractor):
        state = make_state(BASE_HISTORY[:1])
        fv = extractor.extract(state, "hello are you there")
        assert fv.block("word_category_last_user").tolist() == [0.0] * 5
        assert fv.block("types_last_user").tolist() == [0.0] * 6
        assert fv.block("sentiment_last_user").tolist() == [0.0] * 3
        assert fv.block("word_count_last_user")[0] == 0.0

    def test_similarity_blocks_in_range(self, extractor):
        state = make_state(BASE_HISTORY)
        fv = extractor.extract(state, "Napoleon fought in Russia.")
        for name in ("sim_candidate_context", "sim_candidate_article"):
            block = fv.block(name)
            assert np.all(np.abs(block) <= 1.0 + 1e-9)

    def test_identical_candidate_and_article_high_similarity(self, extractor):
        text = "Napoleon fought in Russia. The winter was brutal. Many died."
        state = make_state(BASE_HISTORY, article_text=text)
        fv = extractor.extract(state, text)
        sims = fv.block("sim_candidate_article")
        assert sims[0] == pytest.approx(1.0)
        assert sims[1] == pytest.approx(1.0)
        assert sims[2] == pytest.approx(1.0)
