import pytest

from chorus.core import (
    Article,
    Candidate,
    ConversationState,
    Message,
    Speaker,
    TransitionTuple,
    is_terminal,
    shape_reward,
    split_sentences,
)


def make_state(history=(), conversation_id="c1", bored=0):
    art = Article(article_id="a1", text="Dogs are loyal. Cats are quiet. Birds sing at dawn.")
    return ConversationState(
        conversation_id=conversation_id, article=art, history=tuple(history), bored_counter=bored
    )


class TestRewardShaping:
    # full table: vote 0 kills the reward, otherwise the rating picks the level
    @pytest.mark.parametrize("rating", [1, 2, 3, 4, 5])
    def test_vote_zero_is_zero(self, rating):
        assert shape_reward(0, rating) == 0.0

    @pytest.mark.parametrize(
        "rating,expected",
        [(1, 0.2), (2, 0.2), (3, 0.8), (4, 0.8), (5, 1.0)],
    )
    def test_vote_one_levels(self, rating, expected):
        assert shape_reward(1, rating) == expected

    @pytest.mark.parametrize("rating", [0, 6, -1, 100])
    def test_rating_out_of_range_rejected(self, rating):
        with pytest.raises(ValueError):
            shape_reward(1, rating)

    def test_missing_rating_with_vote_rejected(self):
        with pytest.raises(ValueError):
            shape_reward(1, None)

    def test_bad_vote_rejected(self):
        with pytest.raises(ValueError):
            shape_reward(2, 5)


class TestArticle:
    def test_sentence_split(self):
        art = Article(article_id="a", text="One here. Two there! Three? Four.")
        assert art.sentences == ("One here.", "Two there!", "Three?", "Four.")

    def test_empty_text_rejected(self):
        with pytest.raises(ValueError):
            Article(article_id="a", text="   ")

    def test_split_sentences_drops_blank_parts(self):
        assert split_sentences("Only one sentence") == ("Only one sentence",)

    def test_round_trip(self):
        art = Article(article_id="a1", text="Some text. More text.")
        assert Article.from_dict(art.to_dict()) == art


class TestMessages:
    def test_alternation_enforced_by_turn_index(self):
        s = make_state()
        s = s.extended(Message(Speaker.BOT, "hello", 0))
        s = s.extended(Message(Speaker.HUMAN, "hi", 1))
        with pytest.raises(ValueError):
            s.extended(Message(Speaker.HUMAN, "again", 3))

    def test_negative_turn_index_rejected(self):
        with pytest.raises(ValueError):
            Message(Speaker.HUMAN, "x", -1)

    def test_last_human_message(self):
        s = make_state(
            [
                Message(Speaker.BOT, "greeting", 0),
                Message(Speaker.HUMAN, "first", 1),
                Message(Speaker.BOT, "reply", 2),
            ]
        )
        last = s.last_human_message()
        assert last is not None and last.text == "first"

    def test_no_human_message(self):
        s = make_state([Message(Speaker.BOT, "greeting", 0)])
        assert s.last_human_message() is None

    def test_state_round_trip(self):
        s = make_state(
            [Message(Speaker.BOT, "a", 0), Message(Speaker.HUMAN, "b", 1)], bored=1
        )
        assert ConversationState.from_dict(s.to_dict()) == s


def make_tuple(vote=1, rating=5, terminal=False, reward=None):
    state = make_state([Message(Speaker.BOT, "g", 0), Message(Speaker.HUMAN, "q", 1)])
    action = Candidate(model_name="fact", text="a fact", score=0.4)
    nxt = None if terminal else state.extended(Message(Speaker.BOT, "a fact", 2))
    nxt_cands = () if terminal else (Candidate("fact", "another", 0.3),)
    if reward is None:
        reward = shape_reward(vote, rating if vote else None)
    return TransitionTuple(
        conversation_id="c1",
        turn_index=1,
        state=state,
        action=action,
        reward=reward,
        vote=vote,
        final_rating=rating,
        next_state=nxt,
        next_candidates=nxt_cands,
    )


class TestTransitionTuple:
    def test_terminal_iff_no_next_candidates(self):
        assert is_terminal(make_tuple(terminal=True))
        assert not is_terminal(make_tuple(terminal=False))

    def test_terminal_marker_must_agree_with_candidates(self):
        state = make_state([Message(Speaker.BOT, "g", 0)])
        with pytest.raises(ValueError):
            TransitionTuple(
                conversation_id="c1",
                turn_index=0,
                state=state,
                action=Candidate("fact", "x"),
                reward=0.0,
                vote=0,
                next_state=None,
                next_candidates=(Candidate("fact", "y"),),
            )
        with pytest.raises(ValueError):
            TransitionTuple(
                conversation_id="c1",
                turn_index=0,
                state=state,
                action=Candidate("fact", "x"),
                reward=0.0,
                vote=0,
                next_state=state,
                next_candidates=(),
            )

    def test_reward_levels_enforced(self):
        with pytest.raises(ValueError):
            make_tuple(reward=0.5)

    def test_round_trip(self):
        t = make_tuple()
        assert TransitionTuple.from_dict(t.to_dict()) == t

    def test_round_trip_terminal(self):
        t = make_tuple(terminal=True)
        assert TransitionTuple.from_dict(t.to_dict()) == t

    def test_round_trip_with_shared_article(self):
        t = make_tuple()
        d = t.to_dict(include_article=False)
        art = t.state.article
        assert TransitionTuple.from_dict(d, article=art) == t
