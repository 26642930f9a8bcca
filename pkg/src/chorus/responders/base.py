"""Common contract for candidate generators.

A responder lives for exactly one conversation: the engine creates one
instance per (responder, conversation), calls wake_up once with the article,
then respond after each user message. respond returns the candidate text or
None when the responder has nothing to offer this turn.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Optional

from chorus.core import Article, ConversationState
from chorus.hashing import fnv1a


def instance_seed(engine_seed: int, responder_name: str, conversation_id: str) -> int:
    """Stable per-instance RNG seed; avoids the salted builtin hash."""
    return fnv1a(f"{engine_seed}:{responder_name}:{conversation_id}")


class Responder(ABC):
    name: str

    @abstractmethod
    def wake_up(self, article: Article) -> None: ...

    @abstractmethod
    def respond(self, state: ConversationState) -> Optional[str]: ...


def last_human_text(state: ConversationState) -> Optional[str]:
    msg = state.last_human_message()
    return msg.text if msg is not None else None
