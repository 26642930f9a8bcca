"""Article-level dataset splits and class balancing for scorer training."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from chorus.core import TransitionTuple

SPLIT_NAMES = ("train", "valid", "test")
DEFAULT_FRACTIONS = (0.8, 0.1, 0.1)


@dataclass(frozen=True)
class DatasetSplit:
    train: tuple[TransitionTuple, ...]
    valid: tuple[TransitionTuple, ...]
    test: tuple[TransitionTuple, ...]
    manifest: dict[str, str]

    @property
    def records(self) -> tuple[TransitionTuple, ...]:
        return self.train + self.valid + self.test

    def counts(self) -> dict[str, int]:
        return {
            "train": len(self.train),
            "valid": len(self.valid),
            "test": len(self.test),
        }


def _article_id(record: TransitionTuple) -> str:
    return record.state.article.article_id


def split_by_article(
    records: Sequence[TransitionTuple],
    fractions: tuple[float, float, float] = DEFAULT_FRACTIONS,
    seed: int = 0,
) -> DatasetSplit:
    """Partition by article so no article's turns leak across splits.

    Articles are shuffled with the seed and cut at the rounded fraction
    boundaries; every record follows its article, keeping input order
    within each split.
    """
    if len(fractions) != 3 or any(f <= 0 for f in fractions):
        raise ValueError("fractions must be three positive numbers")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError(f"fractions must sum to 1, got {sum(fractions)}")

    seen: dict[str, None] = {}
    for r in records:
        seen.setdefault(_article_id(r), None)
    articles = list(seen)
    if len(articles) < 3:
        raise ValueError(
            f"need at least 3 distinct articles to split, got {len(articles)}"
        )

    rng = random.Random(seed)
    rng.shuffle(articles)
    n = len(articles)
    # clamp so every split keeps at least one article
    n_train = min(max(round(n * fractions[0]), 1), n - 2)
    n_valid = min(max(round(n * fractions[1]), 1), n - n_train - 1)

    manifest: dict[str, str] = {}
    for i, article_id in enumerate(articles):
        if i < n_train:
            manifest[article_id] = "train"
        elif i < n_train + n_valid:
            manifest[article_id] = "valid"
        else:
            manifest[article_id] = "test"

    buckets: dict[str, list[TransitionTuple]] = {name: [] for name in SPLIT_NAMES}
    for r in records:
        buckets[manifest[_article_id(r)]].append(r)
    return DatasetSplit(
        train=tuple(buckets["train"]),
        valid=tuple(buckets["valid"]),
        test=tuple(buckets["test"]),
        manifest=manifest,
    )


def oversample_positives(
    records: Sequence[TransitionTuple], seed: int = 0
) -> list[TransitionTuple]:
    """Replicate up-voted records until the classes are exactly balanced.

    Every positive appears floor(neg/pos) times, a seeded sample of positives
    once more to close the remainder. Negatives pass through untouched. A
    corpus that is already balanced (or positive-heavy) is returned as-is, so
    the operation is idempotent.
    """
    positives = [r for r in records if r.vote == 1]
    negatives = [r for r in records if r.vote == 0]
    if not positives or not negatives:
        raise ValueError("oversampling needs both up-voted and non-voted records")
    if len(positives) >= len(negatives):
        return list(records)

    rng = random.Random(seed)
    whole, remainder = divmod(len(negatives), len(positives))
    replicated = positives * whole + rng.sample(positives, remainder)
    combined = replicated + negatives
    rng.shuffle(combined)
    return combined
