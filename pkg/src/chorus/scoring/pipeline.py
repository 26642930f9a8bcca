"""Corpus-to-checkpoint glue: featurize transition records, train, save.

Everything here adapts the generic trainers in train.py to the logged
TransitionTuple corpus: feature extraction per architecture, supervised
matrices for the reward objective, QExample sequences for the Q objective,
and the end-to-end train_from_records used by the command line.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import numpy as np

from chorus.core import ConversationState, TransitionTuple
from chorus.data.splits import DatasetSplit, oversample_positives, split_by_article
from chorus.features import FeatureExtractor
from chorus.responders import EnsembleResources
from chorus.scoring.checkpoint import save_checkpoint
from chorus.scoring.deep_net import DeepEmbedder
from chorus.scoring.train import (
    QExample,
    TrainConfig,
    TrainResult,
    build_net,
    train_fitted_q,
    train_supervised,
)

Featurize = Callable[[ConversationState, str], Any]


def make_featurizer(
    arch: str, resources: EnsembleResources
) -> tuple[Featurize, dict[str, Any], dict[str, int]]:
    """(featurize fn, checkpoint manifest, net size kwargs) for one arch."""
    if arch == "small":
        extractor = FeatureExtractor(resources.store, resources.lexicons, resources.tagger)
        return (
            lambda state, text: extractor.extract(state, text).values,
            extractor.manifest_dict(),
            {"in_dim": extractor.dimension},
        )
    if arch == "deep":
        embedder = DeepEmbedder(resources.store)
        return (
            embedder.sample,
            {"embedding_dim": resources.store.dimension},
            {"emb_dim": resources.store.dimension},
        )
    raise ValueError(f"unknown architecture {arch!r}")


def supervised_data(records: Sequence[TransitionTuple], featurize: Featurize, arch: str):
    """Net inputs plus 0/1 vote labels."""
    inputs = [featurize(r.state, r.action.text) for r in records]
    if arch == "small":
        inputs = np.stack(inputs)
    labels = np.array([r.vote for r in records], dtype=np.float64)
    return inputs, labels


def q_data(records: Sequence[TransitionTuple], featurize: Featurize) -> list[QExample]:
    examples = []
    for r in records:
        next_xs = ()
        if r.next_state is not None:
            next_xs = tuple(featurize(r.next_state, c.text) for c in r.next_candidates)
        examples.append(
            QExample(x=featurize(r.state, r.action.text), reward=r.reward, next_xs=next_xs)
        )
    return examples


@dataclass
class TrainedModel:
    net: Any
    result: TrainResult
    objective: str
    arch: str
    config: TrainConfig
    manifest: dict[str, Any]
    split: DatasetSplit

    def save(self, path: str | Path) -> Path:
        return save_checkpoint(
            path,
            self.result.params,
            self.net.config.to_dict(),
            self.objective,
            self.config,
            self.manifest,
        )


def train_from_records(
    records: Sequence[TransitionTuple],
    resources: EnsembleResources,
    objective: str = "reward",
    arch: str = "small",
    cfg: Optional[TrainConfig] = None,
    split: Optional[DatasetSplit] = None,
    split_seed: int = 0,
    oversample: bool = True,
) -> TrainedModel:
    """Split by article, balance classes for the reward objective, train."""
    if objective not in ("reward", "q"):
        raise ValueError(f"objective must be reward or q, got {objective!r}")
    if cfg is None:
        cfg = TrainConfig()
    if split is None:
        split = split_by_article(records, seed=split_seed)
    featurize, manifest, size = make_featurizer(arch, resources)
    net = build_net(arch, objective, cfg, **size)

    train_records: Sequence[TransitionTuple] = split.train
    if objective == "reward":
        if oversample:
            train_records = oversample_positives(split.train, seed=split_seed)
        x_train, y_train = supervised_data(train_records, featurize, arch)
        x_valid, y_valid = supervised_data(split.valid, featurize, arch)
        result = train_supervised(net, x_train, y_train, x_valid, y_valid, cfg)
    else:
        result = train_fitted_q(
            net, q_data(train_records, featurize), q_data(split.valid, featurize), cfg
        )
    return TrainedModel(
        net=net,
        result=result,
        objective=objective,
        arch=arch,
        config=cfg,
        manifest=manifest,
        split=split,
    )


def config_with(base: TrainConfig, overrides: dict[str, Any]) -> TrainConfig:
    """A TrainConfig with the search-grid keys swapped in."""
    return replace(base, **overrides)
