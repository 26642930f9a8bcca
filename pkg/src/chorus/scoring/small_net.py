"""Feed-forward scorer over hand-crafted feature vectors.

Three hidden layers (789, 789, 394 by default), a chosen activation after
each, dropout before the output layer, and a linear head: two logits for the
supervised upvote objective, one scalar for the Q objective. The output layer
starts at zero by default so an untrained reward net scores exactly 0.5; the
gradient checks build instances with a randomized head instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from chorus.scoring.nets_common import (
    PRELU_INIT,
    act_backward,
    act_forward,
    dropout_mask,
    init_weight,
)

Params = dict[str, np.ndarray]


@dataclass(frozen=True)
class SmallNetConfig:
    in_dim: int
    n_out: int = 2
    hidden: tuple[int, ...] = (789, 789, 394)
    activation: str = "relu"
    init: str = "he"
    dropout: float = 0.0
    zero_head: bool = True

    def to_dict(self) -> dict:
        return {
            "kind": "small",
            "in_dim": self.in_dim,
            "n_out": self.n_out,
            "hidden": list(self.hidden),
            "activation": self.activation,
            "init": self.init,
            "dropout": self.dropout,
            "zero_head": self.zero_head,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SmallNetConfig":
        return cls(
            in_dim=d["in_dim"],
            n_out=d["n_out"],
            hidden=tuple(d["hidden"]),
            activation=d["activation"],
            init=d["init"],
            dropout=d["dropout"],
            zero_head=d.get("zero_head", True),
        )


@dataclass
class _Cache:
    x: np.ndarray
    zs: list[np.ndarray] = field(default_factory=list)
    hs: list[np.ndarray] = field(default_factory=list)
    drop: np.ndarray | None = None


class SmallNet:
    def __init__(self, config: SmallNetConfig):
        self.config = config
        self.n_out = config.n_out
        self.n_layers = len(config.hidden)

    def init_params(self, rng: np.random.Generator) -> Params:
        cfg = self.config
        params: Params = {}
        fan_in = cfg.in_dim
        for i, width in enumerate(cfg.hidden, start=1):
            params[f"W{i}"] = init_weight(rng, fan_in, width, cfg.init)
            params[f"b{i}"] = np.zeros(width)
            if cfg.activation == "prelu":
                params[f"a{i}"] = np.array(PRELU_INIT)
            fan_in = width
        head = self.n_layers + 1
        if cfg.zero_head:
            params[f"W{head}"] = np.zeros((fan_in, cfg.n_out))
        else:
            params[f"W{head}"] = init_weight(rng, fan_in, cfg.n_out, cfg.init)
        params[f"b{head}"] = np.zeros(cfg.n_out)
        return params

    def forward_batch(
        self,
        params: Params,
        x: np.ndarray,
        train: bool = False,
        rng: np.random.Generator | None = None,
    ) -> tuple[np.ndarray, _Cache]:
        cfg = self.config
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            x = x[None, :]
        cache = _Cache(x=x)
        h = x
        for i in range(1, self.n_layers + 1):
            z = h @ params[f"W{i}"] + params[f"b{i}"]
            h = act_forward(cfg.activation, z, params.get(f"a{i}"))
            cache.zs.append(z)
            cache.hs.append(h)
        if train and cfg.dropout > 0.0:
            if rng is None:
                raise ValueError("training forward with dropout needs an rng")
            cache.drop = dropout_mask(rng, h.shape, cfg.dropout)
            h = h * cache.drop
            cache.hs[-1] = h
        head = self.n_layers + 1
        out = h @ params[f"W{head}"] + params[f"b{head}"]
        return out, cache

    def backward_batch(self, params: Params, cache: _Cache, dout: np.ndarray) -> Params:
        cfg = self.config
        grads: Params = {}
        head = self.n_layers + 1
        h_last = cache.hs[-1]
        grads[f"W{head}"] = h_last.T @ dout
        grads[f"b{head}"] = dout.sum(axis=0)
        dh = dout @ params[f"W{head}"].T
        if cache.drop is not None:
            dh = dh * cache.drop
        for i in range(self.n_layers, 0, -1):
            z = cache.zs[i - 1]
            # recompute the pre-dropout activation for the derivative
            h = act_forward(cfg.activation, z, params.get(f"a{i}"))
            dz, dslope = act_backward(cfg.activation, z, h, dh, params.get(f"a{i}"))
            if cfg.activation == "prelu":
                grads[f"a{i}"] = np.array(dslope)
            h_prev = cache.x if i == 1 else cache.hs[i - 2]
            grads[f"W{i}"] = h_prev.T @ dz
            grads[f"b{i}"] = dz.sum(axis=0)
            if i > 1:
                dh = dz @ params[f"W{i}"].T
        return grads
