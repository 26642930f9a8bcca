"""Entity sentences: templated questions and statements about article entities.

Each template carries exactly one placeholder naming an entity kind. At
wake-up the article is tagged once; respond picks uniformly among the
(unused template, matching entity) pairs, fills the placeholder, and retires
the template so no sentence repeats within a conversation.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from chorus.core import Article, ConversationState
from chorus.responders.base import Responder
from chorus.text.entities import EntityTagger

# placeholder spelling in template files -> tagger kind
PLACEHOLDER_KINDS = {
    "<person>": "person",
    "<orgs>": "org",
    "<gpe>": "gpe",
    "<loc>": "loc",
    "<product>": "product",
    "<event>": "event",
    "<work of art>": "work_of_art",
    "<language>": "language",
    "<date>": "date",
    "<norp>": "norp",
}


def parse_entity_templates(lines: Sequence[str]) -> list[tuple[str, str, str]]:
    """(template, placeholder, kind) triples; rejects unknown placeholders."""
    parsed = []
    for line in lines:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        found = [ph for ph in PLACEHOLDER_KINDS if ph in line]
        if len(found) != 1:
            raise ValueError(f"template needs exactly one placeholder: {line!r}")
        parsed.append((line, found[0], PLACEHOLDER_KINDS[found[0]]))
    return parsed


def load_entity_templates(path: str | Path) -> list[tuple[str, str, str]]:
    return parse_entity_templates(Path(path).read_text(encoding="utf-8").splitlines())


class EntityResponder(Responder):
    name = "entity"

    def __init__(
        self,
        templates: Sequence[tuple[str, str, str]],
        tagger: EntityTagger,
        seed: int = 0,
    ):
        if not templates:
            raise ValueError("entity responder needs at least one template")
        self._templates = list(templates)
        self._tagger = tagger
        self._rng = np.random.default_rng(seed)
        self._used: set[int] = set()
        self._surfaces: dict[str, list[str]] = {}

    def wake_up(self, article: Article) -> None:
        surfaces: dict[str, list[str]] = {}
        for tag in self._tagger.tag(article.text):
            bucket = surfaces.setdefault(tag.kind, [])
            if tag.surface not in bucket:
                bucket.append(tag.surface)
        self._surfaces = surfaces

    def respond(self, state: ConversationState) -> Optional[str]:
        eligible: list[tuple[int, str]] = []
        for i, (_, _, kind) in enumerate(self._templates):
            if i in self._used:
                continue
            for surface in self._surfaces.get(kind, ()):
                eligible.append((i, surface))
        if not eligible:
            return None
        i, surface = eligible[int(self._rng.integers(len(eligible)))]
        template, placeholder, _ = self._templates[i]
        self._used.add(i)
        return template.replace(placeholder, surface)
