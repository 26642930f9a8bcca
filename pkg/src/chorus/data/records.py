"""Conversation logs, transition export, and the JSONL corpus format.

A corpus file holds one header object per conversation followed by one object
per transition tuple. The article text lives in the header only; readers
reattach it, so round-trips are byte-cheap and equality-exact.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

from chorus.core import (
    Article,
    Candidate,
    ConversationState,
    TransitionTuple,
    shape_reward,
)

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class TurnLog:
    """One collect-mode interaction: the state shown, the full candidate set,
    and which candidate the human picked."""

    state: ConversationState
    candidates: tuple[Candidate, ...]
    selected: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "candidates", tuple(self.candidates))
        if not self.candidates:
            raise ValueError("a logged turn needs at least one candidate")
        if not 0 <= self.selected < len(self.candidates):
            raise ValueError(
                f"selected index {self.selected} out of range for "
                f"{len(self.candidates)} candidates"
            )


@dataclass(frozen=True)
class ConversationLog:
    conversation_id: str
    article: Article
    turns: tuple[TurnLog, ...]
    final_rating: Optional[int] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "turns", tuple(self.turns))


def export_transitions(log: ConversationLog) -> list[TransitionTuple]:
    """One record per (turn, candidate); selected candidates carry vote=1.

    Unrated conversations cannot be shaped into rewards and are skipped.
    """
    if log.final_rating is None:
        warnings.warn(
            f"conversation {log.conversation_id!r} has no final rating; skipped",
            stacklevel=2,
        )
        return []
    records: list[TransitionTuple] = []
    for i, turn in enumerate(log.turns):
        nxt = log.turns[i + 1] if i + 1 < len(log.turns) else None
        for j, candidate in enumerate(turn.candidates):
            vote = 1 if j == turn.selected else 0
            records.append(
                TransitionTuple(
                    conversation_id=log.conversation_id,
                    turn_index=i,
                    state=turn.state,
                    action=candidate,
                    reward=shape_reward(vote, log.final_rating),
                    vote=vote,
                    next_state=nxt.state if nxt is not None else None,
                    next_candidates=nxt.candidates if nxt is not None else (),
                    final_rating=log.final_rating,
                )
            )
    return records


def export_corpus(logs: Iterable[ConversationLog]) -> list[TransitionTuple]:
    records: list[TransitionTuple] = []
    for log in logs:
        records.extend(export_transitions(log))
    return records


def write_transitions(path: str | Path, records: Iterable[TransitionTuple]) -> int:
    """Write a corpus file; returns the number of transition lines written.

    Records are grouped by conversation in first-seen order; each group gets
    a header line carrying the article and rating.
    """
    groups: dict[str, list[TransitionTuple]] = {}
    for r in records:
        groups.setdefault(r.conversation_id, []).append(r)
    written = 0
    with open(path, "w", encoding="utf-8") as fh:
        for cid, group in groups.items():
            header = {
                "kind": "conversation",
                "schema": SCHEMA_VERSION,
                "conversation_id": cid,
                "article": group[0].state.article.to_dict(),
                "final_rating": group[0].final_rating,
                "transitions": len(group),
            }
            fh.write(json.dumps(header, ensure_ascii=False) + "\n")
            for r in group:
                fh.write(
                    json.dumps(r.to_dict(include_article=False), ensure_ascii=False)
                    + "\n"
                )
                written += 1
    return written


def read_corpus(path: str | Path) -> list[TransitionTuple]:
    """Read one corpus file, or every *.jsonl under a directory."""
    p = Path(path)
    if p.is_dir():
        records: list[TransitionTuple] = []
        for child in sorted(p.glob("*.jsonl")):
            records.extend(read_transitions(child))
        return records
    return read_transitions(p)


def read_transitions(path: str | Path) -> list[TransitionTuple]:
    records: list[TransitionTuple] = []
    article: Optional[Article] = None
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            if obj.get("kind") == "conversation":
                if obj.get("schema") != SCHEMA_VERSION:
                    raise ValueError(
                        f"unsupported corpus schema {obj.get('schema')!r} "
                        f"at line {line_no}"
                    )
                article = Article.from_dict(obj["article"])
                continue
            if article is None:
                raise ValueError(f"transition before any header at line {line_no}")
            records.append(TransitionTuple.from_dict(obj, article=article))
    return records
