"""Word lists and the sentiment polarity table.

File format: UTF-8, one entry per line, blank lines and lines starting with
"#" ignored. The polarity table uses token<TAB>value lines.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib.resources import files
from pathlib import Path
from typing import Iterable


def default_resource_dir() -> Path:
    return Path(str(files("chorus").joinpath("resources")))


def read_lines(path: Path) -> list[str]:
    out = []
    for raw in path.read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        out.append(line)
    return out


def load_wordlist(path: Path) -> frozenset[str]:
    return frozenset(line.lower() for line in read_lines(path))


def load_polarity(path: Path) -> dict[str, float]:
    table: dict[str, float] = {}
    for line in read_lines(path):
        token, _, value = line.partition("\t")
        if not value:
            raise ValueError(f"bad polarity line (need token<TAB>value): {line!r}")
        table[token.strip().lower()] = float(value)
    return table


@dataclass(frozen=True)
class Lexicons:
    """All the word lists the features and heuristics consult."""

    stop_words: frozenset[str] = frozenset()
    intensifiers: frozenset[str] = frozenset()
    confusion_words: frozenset[str] = frozenset()
    profanity: frozenset[str] = frozenset()
    negations: frozenset[str] = frozenset()
    wh_words: frozenset[str] = frozenset()
    greeting_words: frozenset[str] = frozenset()
    affirmative_words: frozenset[str] = frozenset()
    negative_words: frozenset[str] = frozenset()
    request_words: frozenset[str] = frozenset()
    politic_words: frozenset[str] = frozenset()
    sentiment_polarity: dict[str, float] = field(default_factory=dict)

    def content_tokens(self, tokens: Iterable[str]) -> list[str]:
        """Tokens that are neither stop words nor bare punctuation."""
        return [
            t for t in tokens if t not in self.stop_words and any(c.isalnum() for c in t)
        ]


_WORDLIST_FIELDS = (
    "stop_words",
    "intensifiers",
    "confusion_words",
    "profanity",
    "negations",
    "wh_words",
    "greeting_words",
    "affirmative_words",
    "negative_words",
    "request_words",
    "politic_words",
)


def load_lexicons(directory: Path | None = None) -> Lexicons:
    base = directory if directory is not None else default_resource_dir() / "lexicons"
    kwargs = {name: load_wordlist(base / f"{name}.txt") for name in _WORDLIST_FIELDS}
    kwargs["sentiment_polarity"] = load_polarity(base / "sentiment_polarity.txt")
    return Lexicons(**kwargs)
