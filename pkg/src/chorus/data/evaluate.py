"""Offline ranking evaluation: Recall@k of the up-voted candidate.

Each logged turn is replayed: the candidates are re-scored with the scorer
under test, ranked by the chosen policy, and counted as a hit at k when the
candidate the human picked lands in the top k. Stochastic policies are
averaged over seeded repetitions, each turn drawing from its own derived
stream so results do not depend on evaluation order.
"""

from __future__ import annotations

import io
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Any, Optional, Sequence

from chorus.core import Candidate, ConversationState, TransitionTuple
from chorus.responders.base import instance_seed
from chorus.scoring.scorers import Scorer
from chorus.selection import SelectionPolicy, Selector
from chorus.text.lexicons import load_lexicons

SAMPLED_REPETITIONS = 32


@dataclass(frozen=True)
class TurnGroup:
    """All records of one logged turn, plus which candidate won the vote."""

    conversation_id: str
    turn_index: int
    state: ConversationState
    candidates: tuple[Candidate, ...]
    voted_index: int


@dataclass(frozen=True)
class EvalReport:
    policy_kind: str
    recall_at: dict[int, float]
    average_recall: float
    recall1_by_context: dict[int, float]
    turns: int
    conversations: int
    skipped_turns: int
    repetitions: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "policy_kind": self.policy_kind,
            "recall_at": {str(k): v for k, v in self.recall_at.items()},
            "average_recall": self.average_recall,
            "recall1_by_context": {
                str(n): v for n, v in self.recall1_by_context.items()
            },
            "turns": self.turns,
            "conversations": self.conversations,
            "skipped_turns": self.skipped_turns,
            "repetitions": self.repetitions,
        }


def group_turns(
    records: Sequence[TransitionTuple],
) -> tuple[list[TurnGroup], int]:
    """Collect records into per-turn groups, dropping turns without a vote.

    Returns the groups in first-seen order and the number skipped.
    """
    order: list[tuple[str, int]] = []
    by_turn: dict[tuple[str, int], list[TransitionTuple]] = {}
    for r in records:
        key = (r.conversation_id, r.turn_index)
        if key not in by_turn:
            by_turn[key] = []
            order.append(key)
        by_turn[key].append(r)

    groups: list[TurnGroup] = []
    skipped = 0
    for key in order:
        rows = by_turn[key]
        voted = [i for i, r in enumerate(rows) if r.vote == 1]
        if len(voted) != 1:
            warnings.warn(
                f"turn {key[1]} of conversation {key[0]!r} has "
                f"{len(voted)} up-voted candidates; excluded from evaluation",
                stacklevel=2,
            )
            skipped += 1
            continue
        groups.append(
            TurnGroup(
                conversation_id=key[0],
                turn_index=key[1],
                state=rows[0].state,
                candidates=tuple(r.action for r in rows),
                voted_index=voted[0],
            )
        )
    return groups, skipped


def _turn_policy(policy: SelectionPolicy, rep: int, group: TurnGroup) -> SelectionPolicy:
    """Derive an order-independent seed for one turn of one repetition."""
    if policy.kind == "argmax":
        return policy
    seed = instance_seed(
        policy.seed + rep, "eval", f"{group.conversation_id}:{group.turn_index}"
    )
    return replace(policy, seed=seed)


def _rank_positions(
    group: TurnGroup,
    scorer: Optional[Scorer],
    policy: SelectionPolicy,
    selector: Selector,
    repetitions: int,
) -> list[int]:
    """Rank of the voted candidate (0-based) for each repetition.

    Without a scorer the candidates keep their logged collection-time scores,
    which replays the ranking the live system would have produced.
    """
    if scorer is None:
        rescored = group.candidates
    else:
        rescored = tuple(
            replace(c, score=float(scorer.score(group.state, c.text)))
            for c in group.candidates
        )
    voted = rescored[group.voted_index]
    positions: list[int] = []
    for rep in range(repetitions):
        ranking = selector.select(group.state, rescored, _turn_policy(policy, rep, group))
        positions.append(next(i for i, c in enumerate(ranking) if c is voted))
    return positions


def evaluate_recall(
    records: Sequence[TransitionTuple],
    scorer: Optional[Scorer],
    policy: SelectionPolicy,
    selector: Optional[Selector] = None,
    max_k: Optional[int] = None,
    repetitions: Optional[int] = None,
    workers: int = 1,
) -> EvalReport:
    """Recall@k of the up-voted candidate over every usable logged turn.

    repetitions defaults to 1, or 32 for the sampled policy; turns may be
    evaluated in parallel because each derives its own RNG stream.
    """
    groups, skipped = group_turns(records)
    if repetitions is None:
        repetitions = SAMPLED_REPETITIONS if policy.kind == "sampled" else 1
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    selector = Selector(load_lexicons()) if selector is None else selector.clone()
    if not groups:
        return EvalReport(
            policy_kind=policy.kind,
            recall_at={},
            average_recall=0.0,
            recall1_by_context={},
            turns=0,
            conversations=0,
            skipped_turns=skipped,
            repetitions=repetitions,
        )
    if max_k is None:
        max_k = max(len(g.candidates) for g in groups)

    def run(group: TurnGroup) -> list[int]:
        return _rank_positions(group, scorer, policy, selector, repetitions)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            all_positions = list(pool.map(run, groups))
    else:
        all_positions = [run(g) for g in groups]

    hit_sums = {k: 0.0 for k in range(1, max_k + 1)}
    context_hits: dict[int, list[float]] = {}
    for group, positions in zip(groups, all_positions):
        for k in hit_sums:
            hit_sums[k] += sum(1 for p in positions if p < k) / repetitions
        hit1 = sum(1 for p in positions if p < 1) / repetitions
        context_hits.setdefault(len(group.state.history), []).append(hit1)

    n = len(groups)
    recall_at = {k: hit_sums[k] / n for k in hit_sums}
    return EvalReport(
        policy_kind=policy.kind,
        recall_at=recall_at,
        average_recall=sum(recall_at.values()) / len(recall_at),
        recall1_by_context={
            length: sum(hits) / len(hits)
            for length, hits in sorted(context_hits.items())
        },
        turns=n,
        conversations=len({g.conversation_id for g in groups}),
        skipped_turns=skipped,
        repetitions=repetitions,
    )


def recall_csv(report: EvalReport) -> str:
    """Plot-ready k,recall rows."""
    out = io.StringIO()
    out.write("k,recall\n")
    for k in sorted(report.recall_at):
        out.write(f"{k},{report.recall_at[k]:.6f}\n")
    return out.getvalue()


def format_report(report: EvalReport) -> str:
    lines = [
        f"policy: {report.policy_kind}  turns: {report.turns}  "
        f"conversations: {report.conversations}  skipped: {report.skipped_turns}  "
        f"repetitions: {report.repetitions}",
        "",
        "  k   R@k",
    ]
    for k in sorted(report.recall_at):
        lines.append(f"  {k:<3} {report.recall_at[k]:.4f}")
    lines.append(f"average R@k: {report.average_recall:.4f}")
    if report.recall1_by_context:
        lines.append("")
        lines.append("  context length   R@1")
        for length in sorted(report.recall1_by_context):
            lines.append(f"  {length:<16} {report.recall1_by_context[length]:.4f}")
    return "\n".join(lines) + "\n"
