"""Descriptive statistics over a transition corpus."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

from chorus.core import TransitionTuple

from .evaluate import group_turns


@dataclass(frozen=True)
class CorpusStats:
    interactions: int
    conversations: int
    avg_interactions_per_chat: float
    context_length_hist: dict[int, int]
    candidate_count_hist: dict[int, int]
    availability_rate: dict[str, float]
    selection_rate: dict[str, float]

    def to_dict(self) -> dict[str, Any]:
        return {
            "interactions": self.interactions,
            "conversations": self.conversations,
            "avg_interactions_per_chat": self.avg_interactions_per_chat,
            "context_length_hist": {str(k): v for k, v in self.context_length_hist.items()},
            "candidate_count_hist": {str(k): v for k, v in self.candidate_count_hist.items()},
            "availability_rate": dict(self.availability_rate),
            "selection_rate": dict(self.selection_rate),
        }


def corpus_stats(records: Sequence[TransitionTuple]) -> CorpusStats:
    """Turn counts, histogram shapes, and per-model availability/selection.

    availability is the fraction of turns where a model produced a candidate;
    selection is the fraction of those turns where its candidate won the vote.
    Turns without a single up-voted candidate still count toward availability
    but cannot contribute a selection.
    """
    order: list[tuple[str, int]] = []
    by_turn: dict[tuple[str, int], list[TransitionTuple]] = {}
    for r in records:
        key = (r.conversation_id, r.turn_index)
        if key not in by_turn:
            by_turn[key] = []
            order.append(key)
        by_turn[key].append(r)

    context_hist: dict[int, int] = {}
    count_hist: dict[int, int] = {}
    available: dict[str, int] = {}
    selected: dict[str, int] = {}
    conversations: set[str] = set()
    for key in order:
        rows = by_turn[key]
        conversations.add(key[0])
        context = len(rows[0].state.history)
        context_hist[context] = context_hist.get(context, 0) + 1
        count_hist[len(rows)] = count_hist.get(len(rows), 0) + 1
        seen_models: set[str] = set()
        for r in rows:
            name = r.action.model_name
            if name not in seen_models:
                seen_models.add(name)
                available[name] = available.get(name, 0) + 1
            if r.vote == 1:
                selected[name] = selected.get(name, 0) + 1

    n_turns = len(order)
    n_chats = len(conversations)
    return CorpusStats(
        interactions=n_turns,
        conversations=n_chats,
        avg_interactions_per_chat=(n_turns / n_chats) if n_chats else 0.0,
        context_length_hist=dict(sorted(context_hist.items())),
        candidate_count_hist=dict(sorted(count_hist.items())),
        availability_rate={
            name: available[name] / n_turns for name in sorted(available)
        },
        selection_rate={
            name: selected.get(name, 0) / available[name]
            for name in sorted(available)
        },
    )


def format_stats(stats: CorpusStats) -> str:
    lines = [
        f"interactions: {stats.interactions}  conversations: {stats.conversations}  "
        f"avg interactions/chat: {stats.avg_interactions_per_chat:.2f}",
        "",
        "  context length   turns",
    ]
    for length, count in stats.context_length_hist.items():
        lines.append(f"  {length:<16} {count}")
    lines.append("")
    lines.append("  candidates/turn  turns")
    for size, count in stats.candidate_count_hist.items():
        lines.append(f"  {size:<16} {count}")
    lines.append("")
    lines.append("  model             available  selected|available")
    for name in stats.availability_rate:
        lines.append(
            f"  {name:<17} {stats.availability_rate[name]:>8.2%}  "
            f"{stats.selection_rate[name]:>8.2%}"
        )
    return "\n".join(lines) + "\n"


__all__ = ["CorpusStats", "corpus_stats", "format_stats", "group_turns"]
