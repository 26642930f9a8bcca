"""Domain model: articles, messages, conversation state, and transition tuples.

Every structure here is an immutable value type with an exact dict round-trip.
The rest of the package builds on these; nothing in this module knows about
responders, scoring, or the service.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Optional

REWARD_LEVELS = (0.0, 0.2, 0.8, 1.0)

_SENTENCE_BOUNDARY = re.compile(r"(?<=[.!?])\s+")


class Speaker(str, Enum):
    HUMAN = "human"
    BOT = "bot"


def split_sentences(text: str) -> tuple[str, ...]:
    """Split a paragraph into sentences on terminal punctuation.

    Deliberately simple: desk-scale articles are plain prose paragraphs and
    the consumers (fact retrieval, extractive answers, features) only need a
    stable, deterministic segmentation.
    """
    parts = [p.strip() for p in _SENTENCE_BOUNDARY.split(text)]
    return tuple(p for p in parts if p)


@dataclass(frozen=True)
class Article:
    """A news-style paragraph the conversation is grounded in."""

    article_id: str
    text: str

    def __post_init__(self) -> None:
        if not self.article_id:
            raise ValueError("article_id must be non-empty")
        if not self.text.strip():
            raise ValueError("article text must be non-empty")

    @property
    def sentences(self) -> tuple[str, ...]:
        return split_sentences(self.text)

    def to_dict(self) -> dict[str, Any]:
        return {"article_id": self.article_id, "text": self.text}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Article":
        return cls(article_id=d["article_id"], text=d["text"])


@dataclass(frozen=True)
class Message:
    """One utterance in a conversation."""

    speaker: Speaker
    text: str
    turn_index: int

    def __post_init__(self) -> None:
        if self.turn_index < 0:
            raise ValueError("turn_index must be >= 0")
        if not isinstance(self.speaker, Speaker):
            raise ValueError("speaker must be a Speaker")

    def to_dict(self) -> dict[str, Any]:
        return {
            "speaker": self.speaker.value,
            "text": self.text,
            "turn_index": self.turn_index,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Message":
        return cls(
            speaker=Speaker(d["speaker"]),
            text=d["text"],
            turn_index=d["turn_index"],
        )


@dataclass(frozen=True)
class Candidate:
    """A scored candidate response produced by one model for one turn."""

    model_name: str
    text: str
    score: float = 0.0

    def __post_init__(self) -> None:
        if not self.model_name:
            raise ValueError("model_name must be non-empty")

    def to_dict(self) -> dict[str, Any]:
        return {"model_name": self.model_name, "text": self.text, "score": self.score}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Candidate":
        return cls(model_name=d["model_name"], text=d["text"], score=d.get("score", 0.0))


@dataclass(frozen=True)
class ConversationState:
    """Snapshot of one conversation: the article plus the dialog so far.

    Immutable so that turn snapshots handed to workers, logs, and transition
    tuples can never be mutated behind each other's backs.
    """

    conversation_id: str
    article: Article
    history: tuple[Message, ...] = field(default_factory=tuple)
    bored_counter: int = 0

    def __post_init__(self) -> None:
        if self.bored_counter < 0:
            raise ValueError("bored_counter must be >= 0")
        object.__setattr__(self, "history", tuple(self.history))

    def extended(self, message: Message) -> "ConversationState":
        """Return a new state with one more message appended."""
        if self.history and message.turn_index != self.history[-1].turn_index + 1:
            raise ValueError(
                f"turn_index {message.turn_index} does not follow "
                f"{self.history[-1].turn_index}"
            )
        return replace(self, history=self.history + (message,))

    def with_bored(self, counter: int) -> "ConversationState":
        return replace(self, bored_counter=counter)

    def last_human_message(self) -> Optional[Message]:
        for m in reversed(self.history):
            if m.speaker is Speaker.HUMAN:
                return m
        return None

    def to_dict(self, include_article: bool = True) -> dict[str, Any]:
        d: dict[str, Any] = {
            "conversation_id": self.conversation_id,
            "history": [m.to_dict() for m in self.history],
            "bored_counter": self.bored_counter,
        }
        if include_article:
            d["article"] = self.article.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any], article: Optional[Article] = None) -> "ConversationState":
        art = article if article is not None else Article.from_dict(d["article"])
        return cls(
            conversation_id=d["conversation_id"],
            article=art,
            history=tuple(Message.from_dict(m) for m in d["history"]),
            bored_counter=d.get("bored_counter", 0),
        )


def shape_reward(vote: int, final_rating: Optional[int]) -> float:
    """Combine the per-turn vote with the end-of-conversation rating.

    A candidate the user did not pick is worth nothing regardless of how the
    conversation went. A picked candidate inherits a discounted share of the
    final rating: low ratings (1-2) give 0.2, good ones (3-4) give 0.8, and a
    perfect 5 gives the full 1.0.
    """
    if vote not in (0, 1):
        raise ValueError(f"vote must be 0 or 1, got {vote!r}")
    if vote == 0:
        return 0.0
    if final_rating is None or not isinstance(final_rating, int) or isinstance(final_rating, bool):
        raise ValueError("a selected candidate needs an integer final rating")
    if not 1 <= final_rating <= 5:
        raise ValueError(f"final rating must be in 1..5, got {final_rating}")
    if final_rating <= 2:
        return 0.2
    if final_rating <= 4:
        return 0.8
    return 1.0


@dataclass(frozen=True)
class TransitionTuple:
    """One (state, action, reward, next state) record for scorer training.

    The action is the candidate the record describes, whether or not it was
    the one picked. next_state is None exactly when the conversation ended on
    this turn; next_candidates is empty in the same case and only then.
    """

    conversation_id: str
    turn_index: int
    state: ConversationState
    action: Candidate
    reward: float
    vote: int
    next_state: Optional[ConversationState]
    next_candidates: tuple[Candidate, ...]
    final_rating: Optional[int] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "next_candidates", tuple(self.next_candidates))
        if self.vote not in (0, 1):
            raise ValueError(f"vote must be 0 or 1, got {self.vote!r}")
        if not any(abs(self.reward - r) < 1e-12 for r in REWARD_LEVELS):
            raise ValueError(f"reward must be one of {REWARD_LEVELS}, got {self.reward!r}")
        if self.final_rating is not None and not 1 <= self.final_rating <= 5:
            raise ValueError(f"final rating must be in 1..5, got {self.final_rating!r}")
        if (self.next_state is None) != (len(self.next_candidates) == 0):
            raise ValueError(
                "terminal marker and next_candidates disagree: next_state must be "
                "None exactly when next_candidates is empty"
            )
        if self.turn_index < 0:
            raise ValueError("turn_index must be >= 0")

    def to_dict(self, include_article: bool = True) -> dict[str, Any]:
        return {
            "conversation_id": self.conversation_id,
            "turn_index": self.turn_index,
            "state": self.state.to_dict(include_article=include_article),
            "action": self.action.to_dict(),
            "reward": self.reward,
            "vote": self.vote,
            "final_rating": self.final_rating,
            "next_state": (
                None
                if self.next_state is None
                else self.next_state.to_dict(include_article=include_article)
            ),
            "next_candidates": [c.to_dict() for c in self.next_candidates],
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any], article: Optional[Article] = None) -> "TransitionTuple":
        next_state = d.get("next_state")
        return cls(
            conversation_id=d["conversation_id"],
            turn_index=d["turn_index"],
            state=ConversationState.from_dict(d["state"], article=article),
            action=Candidate.from_dict(d["action"]),
            reward=d["reward"],
            vote=d["vote"],
            final_rating=d.get("final_rating"),
            next_state=(
                None if next_state is None else ConversationState.from_dict(next_state, article=article)
            ),
            next_candidates=tuple(Candidate.from_dict(c) for c in d.get("next_candidates", [])),
        )


def is_terminal(t: TransitionTuple) -> bool:
    """A tuple is terminal when the conversation produced no further turn."""
    return len(t.next_candidates) == 0
