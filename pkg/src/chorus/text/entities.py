"""Deterministic entity tagging from gazetteers plus a few surface patterns.

Ten kinds: person, org, gpe, loc, product, event, work_of_art, language,
date, norp. Gazetteer matching is case-insensitive and returns the canonical
entry surface; dates come from year/month patterns; unknown capitalized
multi-word sequences fall back to person or org by suffix hint. Longest match
wins, ties go to the leftmost span, and when one surface sits in several
gazetteers the fixed kind order below decides.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any

from chorus.text.lexicons import default_resource_dir, read_lines
from chorus.text.tokenize import tokenize

KIND_ORDER = (
    "person",
    "org",
    "gpe",
    "loc",
    "product",
    "event",
    "work_of_art",
    "norp",
    "language",
    "date",
)

_MONTHS = {
    "january", "february", "march", "april", "may", "june",
    "july", "august", "september", "october", "november", "december",
}

_ORG_HINTS = {
    "inc", "corp", "corporation", "company", "ltd", "university",
    "college", "institute", "club", "association", "committee",
}


@dataclass(frozen=True)
class EntityTag:
    """One tagged span; start/end are token offsets, end exclusive."""

    kind: str
    surface: str
    start: int
    end: int

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "surface": self.surface, "start": self.start, "end": self.end}


def load_gazetteers(directory: Path | None = None) -> dict[str, dict[tuple[str, ...], str]]:
    """Map kind -> {lowercased token tuple -> canonical surface}."""
    base = directory if directory is not None else default_resource_dir() / "gazetteers"
    out: dict[str, dict[tuple[str, ...], str]] = {}
    for kind in KIND_ORDER:
        path = base / f"{kind}.txt"
        if not path.exists():
            continue
        entries: dict[tuple[str, ...], str] = {}
        for surface in read_lines(path):
            key = tuple(tokenize(surface))
            if key:
                entries[key] = surface
        out[kind] = entries
    return out


def _is_year(token: str) -> bool:
    return token.isdigit() and len(token) == 4 and 1000 <= int(token) <= 2999


class EntityTagger:
    def __init__(self, gazetteers: dict[str, dict[tuple[str, ...], str]] | None = None):
        self.gazetteers = gazetteers if gazetteers is not None else load_gazetteers()
        self._max_len = max(
            (len(key) for entries in self.gazetteers.values() for key in entries),
            default=1,
        )

    def tag(self, text: str) -> tuple[EntityTag, ...]:
        cased = tokenize(text, lower=False)
        lower = [t.lower() for t in cased]
        candidates: list[EntityTag] = []
        candidates.extend(self._gazetteer_matches(lower))
        candidates.extend(self._date_matches(cased, lower))
        candidates.extend(self._capitalized_fallback(cased, lower, candidates))
        return self._resolve(candidates)

    def _gazetteer_matches(self, lower: list[str]) -> list[EntityTag]:
        found = []
        n = len(lower)
        for start in range(n):
            for length in range(min(self._max_len, n - start), 0, -1):
                key = tuple(lower[start : start + length])
                for kind in KIND_ORDER:
                    entries = self.gazetteers.get(kind, {})
                    if key in entries:
                        found.append(EntityTag(kind, entries[key], start, start + length))
                        break
        return found

    def _date_matches(self, cased: list[str], lower: list[str]) -> list[EntityTag]:
        found = []
        i = 0
        n = len(lower)
        while i < n:
            if _is_year(lower[i]):
                found.append(EntityTag("date", cased[i], i, i + 1))
                i += 1
                continue
            # a month only counts when written capitalized and followed by a
            # day or year number, so modal "may" stays untouched
            if lower[i] in _MONTHS and cased[i][0].isupper():
                j = i + 1
                if j < n and (lower[j].isdigit()):
                    if j + 1 < n and _is_year(lower[j + 1]):
                        j += 1
                    found.append(EntityTag("date", " ".join(cased[i : j + 1]), i, j + 1))
                    i = j + 1
                    continue
            i += 1
        return found

    def _capitalized_fallback(
        self, cased: list[str], lower: list[str], existing: list[EntityTag]
    ) -> list[EntityTag]:
        taken = [False] * len(cased)
        for tag in existing:
            for k in range(tag.start, tag.end):
                taken[k] = True
        found = []
        i = 0
        n = len(cased)
        while i < n:
            if taken[i] or not (cased[i][:1].isupper() and cased[i].isalpha()) or cased[i] == "I":
                i += 1
                continue
            j = i
            while (
                j < n
                and not taken[j]
                and cased[j][:1].isupper()
                and cased[j].isalpha()
                and cased[j] != "I"
            ):
                j += 1
            start = i
            # a capitalized word at a sentence start is usually just the
            # sentence opener; trim it when a full name remains without it
            at_sentence_start = start == 0 or cased[start - 1] in {".", "!", "?"}
            if at_sentence_start and j - start >= 3:
                start += 1
            if j - start >= 2:
                kind = "org" if any(t in _ORG_HINTS for t in lower[start:j]) else "person"
                found.append(EntityTag(kind, " ".join(cased[start:j]), start, j))
            i = j + 1
        return found

    @staticmethod
    def _resolve(candidates: list[EntityTag]) -> tuple[EntityTag, ...]:
        kind_rank = {k: r for r, k in enumerate(KIND_ORDER)}
        ordered = sorted(
            candidates, key=lambda t: (-(t.end - t.start), t.start, kind_rank[t.kind])
        )
        chosen: list[EntityTag] = []
        for tag in ordered:
            if all(tag.end <= c.start or tag.start >= c.end for c in chosen):
                chosen.append(tag)
        return tuple(sorted(chosen, key=lambda t: (t.start, t.end)))
