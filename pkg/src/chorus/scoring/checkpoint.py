"""Checkpoint files: parameters plus everything needed to rebuild the scorer.

A checkpoint is a single .npz holding every parameter tensor under param/<name>
and one JSON metadata blob: net config, objective, train config, the feature
manifest (or embedding contract for the deep net), and the training seed.
float64 tensors round-trip bitwise.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from chorus.scoring.deep_net import DeepNet, DeepNetConfig
from chorus.scoring.small_net import SmallNet, SmallNetConfig
from chorus.scoring.train import TrainConfig

FORMAT_VERSION = 1


@dataclass
class Checkpoint:
    params: dict[str, np.ndarray]
    net_config: dict[str, Any]
    objective: str
    train_config: TrainConfig
    manifest: dict[str, Any]
    seed: int

    def build_net(self):
        kind = self.net_config.get("kind")
        if kind == "small":
            return SmallNet(SmallNetConfig.from_dict(self.net_config))
        if kind == "deep":
            return DeepNet(DeepNetConfig.from_dict(self.net_config))
        raise ValueError(f"unknown net kind {kind!r}")


def save_checkpoint(
    path: str | Path,
    params: dict[str, np.ndarray],
    net_config: dict[str, Any],
    objective: str,
    train_config: TrainConfig,
    manifest: dict[str, Any],
) -> Path:
    path = Path(path)
    meta = {
        "format_version": FORMAT_VERSION,
        "net_config": net_config,
        "objective": objective,
        "train_config": train_config.to_dict(),
        "manifest": manifest,
        "seed": train_config.seed,
    }
    arrays = {f"param/{k}": np.asarray(v) for k, v in params.items()}
    with open(path, "wb") as fh:
        np.savez(fh, meta=np.frombuffer(json.dumps(meta).encode("utf-8"), dtype=np.uint8), **arrays)
    return path


def load_checkpoint(path: str | Path) -> Checkpoint:
    with np.load(path) as data:
        meta = json.loads(bytes(data["meta"]).decode("utf-8"))
        if meta.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"unsupported checkpoint version {meta.get('format_version')!r}")
        params = {
            k[len("param/") :]: data[k].copy() for k in data.files if k.startswith("param/")
        }
    return Checkpoint(
        params=params,
        net_config=meta["net_config"],
        objective=meta["objective"],
        train_config=TrainConfig.from_dict(meta["train_config"]),
        manifest=meta["manifest"],
        seed=meta["seed"],
    )
