"""Persona answers: regex triggers with fixed replies.

Fires only when the last user message matches one of the configured
expressions; first matching rule in file order wins. This is the only
responder that usually stays silent.
"""

from __future__ import annotations

import re
from pathlib import Path
from typing import Optional, Sequence

from chorus.core import Article, ConversationState
from chorus.responders.base import Responder, last_human_text


def parse_persona_rules(lines: Sequence[str]) -> list[tuple[re.Pattern, str]]:
    rules = []
    for line in lines:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        pattern, answer = line.split("\t", 1)
        rules.append((re.compile(pattern, re.IGNORECASE), answer.strip()))
    return rules


def load_persona_rules(path: str | Path) -> list[tuple[re.Pattern, str]]:
    return parse_persona_rules(Path(path).read_text(encoding="utf-8").splitlines())


class SimpleAnswersResponder(Responder):
    name = "simple_answers"

    def __init__(self, rules: Sequence[tuple[re.Pattern, str]]):
        if not rules:
            raise ValueError("simple answers needs at least one rule")
        self._rules = list(rules)

    def wake_up(self, article: Article) -> None:
        pass

    def respond(self, state: ConversationState) -> Optional[str]:
        text = last_human_text(state)
        if text is None:
            return None
        for pattern, answer in self._rules:
            if pattern.search(text):
                return answer
        return None
