"""Deterministic stand-ins for the neural generators, plus test doubles.

The canned-line responders cover social chit-chat, the question generator
builds one question per article sentence at wake-up, and the extractive QA
stub answers with the article sentence sharing the most content words with
the user's message. Fault wrappers at the bottom exist for supervision and
deadline tests.
"""

from __future__ import annotations

import threading
import time
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from chorus.core import Article, ConversationState
from chorus.responders.base import Responder, last_human_text
from chorus.text.lexicons import Lexicons
from chorus.text.tokenize import has_word_chars, tokenize


def load_lines(path: str | Path) -> list[str]:
    return [
        line.strip()
        for line in Path(path).read_text(encoding="utf-8").splitlines()
        if line.strip() and not line.startswith("#")
    ]


class CannedLineResponder(Responder):
    """Cycles through a shuffled line pack; order fixed by the seed."""

    def __init__(self, name: str, lines: Sequence[str], seed: int = 0):
        if not lines:
            raise ValueError(f"{name} needs a non-empty line pack")
        self.name = name
        self._lines = tuple(lines)
        self._seed = seed
        self._order: Optional[np.ndarray] = None
        self._cursor = 0

    def wake_up(self, article: Article) -> None:
        self._order = np.random.default_rng(self._seed).permutation(len(self._lines))
        self._cursor = 0

    def respond(self, state: ConversationState) -> Optional[str]:
        if self._order is None:
            return None
        line = self._lines[int(self._order[self._cursor % len(self._lines)])]
        self._cursor += 1
        return line


def _content_tokens(text: str, lexicons: Lexicons, lower: bool = True) -> list[str]:
    tokens = tokenize(text, lower=lower)
    return [
        t
        for t in tokens
        if has_word_chars(t) and t.lower() not in lexicons.stop_words
    ]


class QuestionGenResponder(Responder):
    """One question per article sentence, prepared at wake-up.

    The focus of each question is the sentence's longest content token
    (earliest wins ties); question forms rotate by sentence index.
    """

    name = "question_gen"

    def __init__(self, forms: Sequence[str], lexicons: Lexicons):
        if not forms:
            raise ValueError("question generator needs at least one form")
        self._forms = tuple(forms)
        self._lexicons = lexicons
        self._questions: list[str] = []
        self._cursor = 0

    def wake_up(self, article: Article) -> None:
        self._questions = []
        self._cursor = 0
        for i, sentence in enumerate(article.sentences):
            content = _content_tokens(sentence, self._lexicons, lower=False)
            if not content:
                continue
            focus = content[0]
            for tok in content[1:]:
                if len(tok) > len(focus):
                    focus = tok
            form = self._forms[i % len(self._forms)]
            self._questions.append(form.replace("<focus>", focus))

    def respond(self, state: ConversationState) -> Optional[str]:
        if self._cursor >= len(self._questions):
            return None
        question = self._questions[self._cursor]
        self._cursor += 1
        return question


class ArticleQaResponder(Responder):
    """Returns the article sentence with the largest content-word overlap
    with the last user message; ties go to the earliest sentence and zero
    overlap degrades to the first sentence."""

    name = "article_qa"

    def __init__(self, lexicons: Lexicons):
        self._lexicons = lexicons
        self._sentences: list[str] = []
        self._content: list[set[str]] = []

    def wake_up(self, article: Article) -> None:
        self._sentences = list(article.sentences)
        self._content = [
            set(_content_tokens(s, self._lexicons)) for s in self._sentences
        ]

    def respond(self, state: ConversationState) -> Optional[str]:
        text = last_human_text(state)
        if text is None or not self._sentences:
            return None
        asked = set(_content_tokens(text, self._lexicons))
        best, best_overlap = 0, -1
        for i, content in enumerate(self._content):
            overlap = len(asked & content)
            if overlap > best_overlap:
                best, best_overlap = i, overlap
        return self._sentences[best]


class EchoResponder(Responder):
    """Repeats the last user message; the wire-protocol smoke generator."""

    name = "echo"

    def wake_up(self, article: Article) -> None:
        pass

    def respond(self, state: ConversationState) -> Optional[str]:
        return last_human_text(state)


class SleepyResponder(Responder):
    """Delegates after a fixed delay; exercises deadline enforcement."""

    def __init__(self, inner: Responder, delay: float, sleep_on_wake: bool = False):
        self.name = inner.name
        self._inner = inner
        self._delay = delay
        self._sleep_on_wake = sleep_on_wake

    def wake_up(self, article: Article) -> None:
        if self._sleep_on_wake:
            time.sleep(self._delay)
        self._inner.wake_up(article)

    def respond(self, state: ConversationState) -> Optional[str]:
        time.sleep(self._delay)
        return self._inner.respond(state)


class CrashingResponder(Responder):
    """Raises on demand; exercises worker revival."""

    def __init__(self, inner: Responder, crash_times: int = 1):
        self.name = inner.name
        self._inner = inner
        self.crashes_left = crash_times

    def wake_up(self, article: Article) -> None:
        self._inner.wake_up(article)

    def respond(self, state: ConversationState) -> Optional[str]:
        if self.crashes_left > 0:
            self.crashes_left -= 1
            raise RuntimeError("injected responder crash")
        return self._inner.respond(state)


class HangingResponder(Responder):
    """Blocks until released; exercises ping timeouts and revival."""

    def __init__(
        self,
        inner: Responder,
        hang_times: int = 1,
        release: Optional[threading.Event] = None,
    ):
        self.name = inner.name
        self._inner = inner
        self.hangs_left = hang_times
        self.release = release if release is not None else threading.Event()

    def wake_up(self, article: Article) -> None:
        self._inner.wake_up(article)

    def respond(self, state: ConversationState) -> Optional[str]:
        if self.hangs_left > 0:
            self.hangs_left -= 1
            self.release.wait()
        return self._inner.respond(state)
