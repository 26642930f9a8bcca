"""Training loops for both objectives, plus the Q-target computation.

The supervised loop fits P(upvote) with cross entropy and early-stops on
validation F1. The fitted-Q loop regresses Q(s, a) onto
r + gamma * Q_target(s', argmax_a' Q_online(s', a')) with Huber loss, syncing
the frozen target parameters every target_sync_every optimizer steps and
early-stopping on the full-validation Huber loss. Terminal transitions
regress straight onto r.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict
from typing import Any, Callable, Optional, Sequence

import numpy as np

from chorus.core import Candidate, ConversationState, TransitionTuple, is_terminal
from chorus.scoring.deep_net import DeepNet, DeepNetConfig
from chorus.scoring.losses import (
    cross_entropy_loss,
    huber_grad,
    huber_loss,
    softmax,
)
from chorus.scoring.nets_common import copy_params
from chorus.scoring.optimizers import make_optimizer
from chorus.scoring.small_net import SmallNet, SmallNetConfig

QFunction = Callable[[ConversationState, Candidate], float]


class TrainingDiverged(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    optimizer: str = "adam"
    learning_rate: float = 1e-3
    activation: str = "relu"
    init: str = "he"
    dropout: float = 0.0
    batch_size: int = 128
    gamma: float = 0.99
    target_sync_every: int = 2000
    patience: int = 20
    max_episodes: int = 10000
    seed: int = 0
    hidden_sizes: tuple[int, ...] = (789, 789, 394)
    deep_hidden: int = 300

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["hidden_sizes"] = list(self.hidden_sizes)
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "TrainConfig":
        d = dict(d)
        d["hidden_sizes"] = tuple(d.get("hidden_sizes", (789, 789, 394)))
        return cls(**d)


# Best configurations found by the random search, by (objective, architecture).
DEFAULT_CONFIGS: dict[tuple[str, str], TrainConfig] = {
    ("reward", "small"): TrainConfig(
        optimizer="rmsprop", learning_rate=1e-4, activation="prelu", init="he", dropout=0.2
    ),
    ("reward", "deep"): TrainConfig(
        optimizer="sgd", learning_rate=1e-3, activation="prelu", init="he", dropout=0.4
    ),
    ("q", "small"): TrainConfig(
        optimizer="sgd", learning_rate=1e-4, activation="sigmoid", init="glorot", dropout=0.8
    ),
    ("q", "deep"): TrainConfig(
        optimizer="adam", learning_rate=1e-4, activation="sigmoid", init="glorot", dropout=0.8
    ),
}


def build_net(
    arch: str,
    objective: str,
    cfg: TrainConfig,
    in_dim: Optional[int] = None,
    emb_dim: Optional[int] = None,
    zero_head: bool = True,
):
    n_out = 2 if objective == "reward" else 1
    if arch == "small":
        if in_dim is None:
            raise ValueError("small architecture needs in_dim")
        return SmallNet(
            SmallNetConfig(
                in_dim=in_dim,
                n_out=n_out,
                hidden=cfg.hidden_sizes,
                activation=cfg.activation,
                init=cfg.init,
                dropout=cfg.dropout,
                zero_head=zero_head,
            )
        )
    if arch == "deep":
        if emb_dim is None:
            raise ValueError("deep architecture needs emb_dim")
        return DeepNet(
            DeepNetConfig(
                emb_dim=emb_dim,
                n_out=n_out,
                hidden=cfg.deep_hidden,
                activation=cfg.activation,
                init=cfg.init,
                dropout=cfg.dropout,
                zero_head=zero_head,
            )
        )
    raise ValueError(f"unknown architecture {arch!r}")


def sync_target(params: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    """Fresh copy of the online parameters for the frozen target network."""
    return copy_params(params)


def double_dqn_target(
    t: TransitionTuple, online: QFunction, target: QFunction, gamma: float
) -> float:
    """One transition's regression target.

    Terminal transitions return the raw reward. Otherwise the online network
    picks the best next candidate and the frozen target network prices it.
    """
    if (t.next_state is None) != (len(t.next_candidates) == 0):
        raise ValueError("transition violates the terminal contract")
    if is_terminal(t):
        return float(t.reward)
    assert t.next_state is not None
    online_qs = [online(t.next_state, c) for c in t.next_candidates]
    best = int(np.argmax(online_qs))
    return float(t.reward + gamma * target(t.next_state, t.next_candidates[best]))


@dataclass(frozen=True)
class QExample:
    """A transition reduced to net inputs: one for (s, a), one per (s', a')."""

    x: Any
    reward: float
    next_xs: tuple = ()

    @property
    def terminal(self) -> bool:
        return len(self.next_xs) == 0


@dataclass
class TrainResult:
    params: dict[str, np.ndarray]
    history: list[dict[str, float]] = field(default_factory=list)
    best_metric: float = 0.0
    episodes: int = 0
    steps: int = 0


def _stack(inputs: Sequence) -> Any:
    if inputs and isinstance(inputs[0], np.ndarray):
        return np.stack(inputs)
    return list(inputs)


def _forward_scores(net, params, inputs) -> np.ndarray:
    out, _ = net.forward_batch(params, inputs, train=False)
    return out[:, 0]


def _batch_targets(net, online, target, batch: Sequence[QExample], gamma: float) -> np.ndarray:
    """Vectorized double-DQN targets for one batch."""
    targets = np.array([ex.reward for ex in batch], dtype=np.float64)
    gather = []
    spans = []
    for i, ex in enumerate(batch):
        if ex.terminal:
            continue
        spans.append((i, len(gather), len(gather) + len(ex.next_xs)))
        gather.extend(ex.next_xs)
    if not gather:
        return targets
    stacked = _stack(gather)
    q_online = _forward_scores(net, online, stacked)
    q_target = _forward_scores(net, target, stacked)
    for i, lo, hi in spans:
        best = lo + int(np.argmax(q_online[lo:hi]))
        targets[i] += gamma * q_target[best]
    return targets


def _q_validation_loss(net, online, target, examples: Sequence[QExample], gamma: float) -> float:
    xs = _stack([ex.x for ex in examples])
    q = _forward_scores(net, online, xs)
    targets = _batch_targets(net, online, target, examples, gamma)
    return huber_loss(q, targets)


def train_fitted_q(
    net,
    train_examples: Sequence[QExample],
    valid_examples: Sequence[QExample],
    cfg: TrainConfig,
    params: Optional[dict[str, np.ndarray]] = None,
    stop_fn: Optional[Callable[[dict[str, np.ndarray]], bool]] = None,
) -> TrainResult:
    rng = np.random.default_rng(cfg.seed)
    if params is None:
        params = net.init_params(rng)
    target_params = sync_target(params)
    optimizer = make_optimizer(cfg.optimizer, cfg.learning_rate)

    best = float("inf")
    best_params = copy_params(params)
    patience_left = cfg.patience
    history: list[dict[str, float]] = []
    step = 0
    episode = 0
    n = len(train_examples)
    for episode in range(1, cfg.max_episodes + 1):
        order = rng.permutation(n)
        episode_losses = []
        for lo in range(0, n, cfg.batch_size):
            batch = [train_examples[i] for i in order[lo : lo + cfg.batch_size]]
            xs = _stack([ex.x for ex in batch])
            out, caches = net.forward_batch(params, xs, train=True, rng=rng)
            q = out[:, 0]
            targets = _batch_targets(net, params, target_params, batch, cfg.gamma)
            loss = huber_loss(q, targets)
            if not np.isfinite(loss):
                raise TrainingDiverged(
                    f"non-finite Q loss at episode {episode}, step {step}"
                )
            episode_losses.append(loss)
            dout = huber_grad(q, targets)[:, None]
            if net.n_out > 1:
                dout = np.pad(dout, ((0, 0), (0, net.n_out - 1)))
            grads = net.backward_batch(params, caches, dout)
            optimizer.step(params, grads)
            step += 1
            if step % cfg.target_sync_every == 0:
                target_params = sync_target(params)
        valid_loss = _q_validation_loss(net, params, target_params, valid_examples, cfg.gamma)
        history.append(
            {
                "episode": episode,
                "train_loss": float(np.mean(episode_losses)),
                "valid_loss": valid_loss,
            }
        )
        if valid_loss < best:
            best = valid_loss
            best_params = copy_params(params)
            patience_left = cfg.patience
        else:
            patience_left -= 1
            if patience_left <= 0:
                break
        if stop_fn is not None and stop_fn(params):
            best_params = copy_params(params)
            best = valid_loss
            break
    return TrainResult(
        params=best_params, history=history, best_metric=best, episodes=episode, steps=step
    )


def binary_f1(pred: np.ndarray, truth: np.ndarray) -> float:
    pred = np.asarray(pred).astype(bool)
    truth = np.asarray(truth).astype(bool)
    tp = float(np.sum(pred & truth))
    fp = float(np.sum(pred & ~truth))
    fn = float(np.sum(~pred & truth))
    if tp == 0.0:
        return 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2.0 * precision * recall / (precision + recall)


def train_supervised(
    net,
    train_inputs,
    train_labels: np.ndarray,
    valid_inputs,
    valid_labels: np.ndarray,
    cfg: TrainConfig,
    params: Optional[dict[str, np.ndarray]] = None,
) -> TrainResult:
    rng = np.random.default_rng(cfg.seed)
    if params is None:
        params = net.init_params(rng)
    optimizer = make_optimizer(cfg.optimizer, cfg.learning_rate)
    y_train = np.asarray(train_labels, dtype=np.float64)
    y_valid = np.asarray(valid_labels, dtype=np.float64)

    best_f1 = -1.0
    best_params = copy_params(params)
    patience_left = cfg.patience
    history: list[dict[str, float]] = []
    step = 0
    episode = 0
    n = len(y_train)
    for episode in range(1, cfg.max_episodes + 1):
        order = rng.permutation(n)
        episode_losses = []
        for lo in range(0, n, cfg.batch_size):
            idx = order[lo : lo + cfg.batch_size]
            xs = _take(train_inputs, idx)
            y = y_train[idx]
            out, caches = net.forward_batch(params, xs, train=True, rng=rng)
            p = softmax(out)
            loss = cross_entropy_loss(p[:, 1], y)
            if not np.isfinite(loss):
                raise TrainingDiverged(
                    f"non-finite supervised loss at episode {episode}, step {step}"
                )
            episode_losses.append(loss)
            # mean-reduced cross entropy through the softmax head
            dlogits = p.copy()
            dlogits[:, 1] -= y
            dlogits[:, 0] -= 1.0 - y
            dlogits /= len(y)
            grads = net.backward_batch(params, caches, dlogits)
            optimizer.step(params, grads)
            step += 1
        valid_p = softmax(net.forward_batch(params, valid_inputs, train=False)[0])[:, 1]
        valid_loss = cross_entropy_loss(valid_p, y_valid)
        f1 = binary_f1(valid_p > 0.5, y_valid > 0.5)
        history.append(
            {
                "episode": episode,
                "train_loss": float(np.mean(episode_losses)),
                "valid_loss": valid_loss,
                "valid_f1": f1,
            }
        )
        if f1 > best_f1:
            best_f1 = f1
            best_params = copy_params(params)
            patience_left = cfg.patience
        else:
            patience_left -= 1
            if patience_left <= 0:
                break
    return TrainResult(
        params=best_params, history=history, best_metric=best_f1, episodes=episode, steps=step
    )


def _take(inputs, idx):
    if isinstance(inputs, np.ndarray):
        return inputs[idx]
    return [inputs[i] for i in idx]
