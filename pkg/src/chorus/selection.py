"""Selection policies: rule cascade, argmax, and score-proportional sampling.

All three produce a full ranking (head = the reply to send), so recall
evaluation can reuse the exact production code path.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from chorus.core import Article, Candidate, ConversationState
from chorus.responders import (
    EXIT_RESPONDER,
    FLEXIBLE_RESPONDERS,
    OPENER_RESPONDERS,
    QUESTION_TURN_RESPONDERS,
    RE_ENGAGE_RESPONDERS,
    STATEMENT_TURN_RESPONDERS,
)
from chorus.responders.base import instance_seed, last_human_text
from chorus.text.entities import EntityTagger
from chorus.text.lexicons import Lexicons, default_resource_dir, read_lines
from chorus.text.tokenize import has_word_chars, tokenize

GREETING = (
    "Hello! I hope you're doing well. I am doing fantastic today! "
    "Let me go through the article real quick and we will start talking about it."
)

POLICY_KINDS = ("rule_based", "argmax", "sampled")


@dataclass(frozen=True)
class SelectionThresholds:
    high: float = 0.75
    low: float = 0.25
    bored_limit: int = 2
    short_word_limit: int = 3


@dataclass(frozen=True)
class SelectionPolicy:
    kind: str = "rule_based"
    seed: int = 0
    thresholds: SelectionThresholds = field(default_factory=SelectionThresholds)

    def __post_init__(self) -> None:
        if self.kind not in POLICY_KINDS:
            raise ValueError(f"unknown policy kind {self.kind!r}")


class RankedCandidates(list):
    """Ordering of the turn's candidates; index 0 is the reply to send.

    fired_rule names the cascade rule that picked the head (1..8), or None
    for argmax/sampled policies. The caller resets the bored counter when
    it sees rule 4.
    """

    def __init__(self, items: Sequence[Candidate], fired_rule: Optional[int] = None):
        super().__init__(items)
        self.fired_rule = fired_rule


def normalized_weights(scores: Sequence[float]) -> list[float]:
    """Shift by the minimum, then divide by the sum.

    Keeps ordering for negative scores; an all-equal set (zero sum after the
    shift) falls back to uniform.
    """
    if not scores:
        return []
    lo = min(scores)
    shifted = [s - lo for s in scores]
    total = sum(shifted)
    if total <= 0.0:
        return [1.0 / len(scores)] * len(scores)
    return [s / total for s in shifted]


def weighted_draw(rng: random.Random, items: Sequence, weights: Sequence[float]) -> int:
    """Index of one draw; assumes weights already sum to 1."""
    x = rng.random()
    acc = 0.0
    for i, w in enumerate(weights):
        acc += w
        if x < acc:
            return i
    return len(items) - 1


def argmax_ranking(candidates: Sequence[Candidate]) -> RankedCandidates:
    order = sorted(
        range(len(candidates)), key=lambda i: (-candidates[i].score, i)
    )
    return RankedCandidates([candidates[i] for i in order])


def sampled_ranking(
    candidates: Sequence[Candidate], rng: random.Random
) -> RankedCandidates:
    """Repeated score-proportional draws without replacement."""
    remaining = list(candidates)
    out: list[Candidate] = []
    while remaining:
        weights = normalized_weights([c.score for c in remaining])
        out.append(remaining.pop(weighted_draw(rng, remaining, weights)))
    return RankedCandidates(out)


def is_wh_question(text: str, lexicons: Lexicons) -> bool:
    """Ends with a question mark and carries a wh-word somewhere."""
    stripped = text.rstrip()
    if not stripped.endswith("?"):
        return False
    return any(t in lexicons.wh_words for t in tokenize(stripped))


def update_bored_counter(
    state: ConversationState,
    user_message: str,
    lexicons: Lexicons,
    thresholds: SelectionThresholds = SelectionThresholds(),
) -> int:
    """Counter goes up on short or all-stop-word messages; rule 4 resets it."""
    words = [t for t in tokenize(user_message) if has_word_chars(t)]
    boring = len(words) < thresholds.short_word_limit or all(
        w in lexicons.stop_words for w in words
    )
    return state.bored_counter + 1 if boring else state.bored_counter


def load_topic_question_patterns(path: Optional[Path] = None) -> tuple[re.Pattern, ...]:
    if path is None:
        path = default_resource_dir() / "packs" / "topic_questions.txt"
    return tuple(re.compile(line, re.IGNORECASE) for line in read_lines(path))


def matches_topic_question(text: str, patterns: Sequence[re.Pattern]) -> bool:
    return any(p.search(text) for p in patterns)


class Selector:
    """Applies one policy to a scored candidate set.

    Holds the article-entity cache and one RNG stream per conversation so
    repeated turns in the same conversation draw from one seeded sequence.
    """

    def __init__(
        self,
        lexicons: Lexicons,
        tagger: Optional[EntityTagger] = None,
        topic_question_patterns: Optional[Sequence[re.Pattern]] = None,
    ):
        self._lexicons = lexicons
        self._tagger = tagger if tagger is not None else EntityTagger()
        if topic_question_patterns is None:
            topic_question_patterns = load_topic_question_patterns()
        self._topic_patterns = tuple(
            p if isinstance(p, re.Pattern) else re.compile(p, re.IGNORECASE)
            for p in topic_question_patterns
        )
        self._article_surfaces: dict[str, tuple[str, ...]] = {}
        self._rngs: dict[tuple[int, str], random.Random] = {}

    def clone(self) -> "Selector":
        """Same immutable resources, fresh RNG streams.

        Offline replays clone the selector so repeated runs never resume a
        stream an earlier run already advanced.
        """
        dup = Selector(self._lexicons, self._tagger, self._topic_patterns)
        dup._article_surfaces = self._article_surfaces
        return dup

    def rng_for(self, policy: SelectionPolicy, conversation_id: str) -> random.Random:
        key = (policy.seed, conversation_id)
        if key not in self._rngs:
            self._rngs[key] = random.Random(
                instance_seed(policy.seed, "selection", conversation_id)
            )
        return self._rngs[key]

    def select(
        self,
        state: ConversationState,
        candidates: Sequence[Candidate],
        policy: SelectionPolicy,
    ) -> RankedCandidates:
        if not candidates:
            raise ValueError("select requires at least one candidate")
        if policy.kind == "argmax":
            return argmax_ranking(candidates)
        rng = self.rng_for(policy, state.conversation_id)
        if policy.kind == "sampled":
            return sampled_ranking(candidates, rng)
        return self._rule_based(state, candidates, policy.thresholds, rng)

    def greeting_and_opener(
        self,
        state: ConversationState,
        candidates: Sequence[Candidate],
        policy: SelectionPolicy,
    ) -> tuple[str, Optional[Candidate]]:
        """The scripted greeting plus a uniformly drawn opener candidate.

        Openers come from the question and entity generators; when neither
        produced anything the fact generator stands in.
        """
        rng = self.rng_for(policy, state.conversation_id)
        openers = [c for c in candidates if c.model_name in OPENER_RESPONDERS]
        if openers:
            return GREETING, openers[rng.randrange(len(openers))]
        facts = [c for c in candidates if c.model_name == EXIT_RESPONDER]
        return GREETING, facts[0] if facts else None

    def _rule_based(
        self,
        state: ConversationState,
        candidates: Sequence[Candidate],
        thresholds: SelectionThresholds,
        rng: random.Random,
    ) -> RankedCandidates:
        last = last_human_text(state)

        head, rule = self._cascade_head(state, candidates, last, thresholds, rng)
        if head is None:
            ranking = argmax_ranking(candidates)
            ranking.fired_rule = None
            return ranking
        rest = argmax_ranking([c for c in candidates if c is not head])
        return RankedCandidates([head] + list(rest), fired_rule=rule)

    def _cascade_head(
        self,
        state: ConversationState,
        candidates: Sequence[Candidate],
        last: Optional[str],
        thresholds: SelectionThresholds,
        rng: random.Random,
    ) -> tuple[Optional[Candidate], Optional[int]]:
        by_model: dict[str, list[Candidate]] = {}
        for c in candidates:
            by_model.setdefault(c.model_name, []).append(c)

        def first_of(name: str) -> Optional[Candidate]:
            group = by_model.get(name)
            return group[0] if group else None

        def pool(names: Sequence[str], min_score: Optional[float]) -> list[Candidate]:
            out = []
            for c in candidates:
                if c.model_name not in names:
                    continue
                if min_score is not None and c.score <= min_score:
                    continue
                out.append(c)
            return out

        # 1. a persona answer matched the message verbatim
        simple = first_of("simple_answers")
        if simple is not None:
            return simple, 1

        # 2. the user asked what the article is about
        if last is not None and matches_topic_question(last, self._topic_patterns):
            topic = first_of("topic")
            if topic is not None:
                return topic, 2

        # 3. a wh-question naming an article entity goes to extractive QA
        if (
            last is not None
            and is_wh_question(last, self._lexicons)
            and self._shares_article_entity(last, state.article)
        ):
            qa = first_of("article_qa")
            if qa is not None:
                return qa, 3

        # 4. the user looks bored: re-engage with a question, fact, or entity
        if state.bored_counter >= thresholds.bored_limit:
            pool4 = pool(RE_ENGAGE_RESPONDERS, min_score=None)
            if pool4:
                weights = normalized_weights([c.score for c in pool4])
                return pool4[weighted_draw(rng, pool4, weights)], 4

        # 5. a flexible generator the scorer strongly believes in
        confident = [
            c
            for c in candidates
            if c.model_name in FLEXIBLE_RESPONDERS
            and thresholds.high <= c.score <= 1.0
        ]
        if confident:
            best = max(range(len(confident)), key=lambda i: (confident[i].score, -i))
            return confident[best], 5

        # 6 and 7. sample flexible generators past the floor, QA for
        # questions, question/entity generators for statements
        if last is not None and is_wh_question(last, self._lexicons):
            pool67 = pool(QUESTION_TURN_RESPONDERS, min_score=thresholds.low)
            rule = 6
        else:
            pool67 = pool(STATEMENT_TURN_RESPONDERS, min_score=thresholds.low)
            rule = 7
        if pool67:
            weights = normalized_weights([c.score for c in pool67])
            return pool67[weighted_draw(rng, pool67, weights)], rule

        # 8. the exit door
        fact = first_of(EXIT_RESPONDER)
        if fact is not None:
            return fact, 8
        return None, None

    def _shares_article_entity(self, text: str, article: Article) -> bool:
        surfaces = self._article_surfaces.get(article.article_id)
        if surfaces is None:
            surfaces = tuple(
                dict.fromkeys(tag.surface for tag in self._tagger.tag(article.text))
            )
            self._article_surfaces[article.article_id] = surfaces
        lower = text.lower()
        for surface in surfaces:
            if re.search(rf"\b{re.escape(surface.lower())}\b", lower):
                return True
        return False
