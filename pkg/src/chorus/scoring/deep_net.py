"""Hierarchical GRU scorer over word vectors.

One token-level GRU (shared weights) encodes the article, each context
message, and the candidate; an utterance-level GRU runs over the message
encodings. The value head reads [article ; context], the advantage head reads
[article ; context ; candidate], and the output is V + Adv: a scalar for the
Q objective or two logits for the supervised one. Inputs are fixed pre-trained
word vectors; nothing backpropagates into them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from chorus.core import ConversationState
from chorus.scoring.nets_common import (
    PRELU_INIT,
    act_backward,
    act_forward,
    dropout_mask,
    init_weight,
)
from chorus.text.embeddings import EmbeddingStore
from chorus.text.tokenize import tokenize

Params = dict[str, np.ndarray]

_GATES = ("z", "r", "h")


@dataclass(frozen=True)
class DeepNetConfig:
    emb_dim: int
    n_out: int = 1
    hidden: int = 300
    activation: str = "relu"
    init: str = "he"
    dropout: float = 0.0
    max_messages: int = 11
    max_tokens: int = 40
    zero_head: bool = True

    def to_dict(self) -> dict:
        return {
            "kind": "deep",
            "emb_dim": self.emb_dim,
            "n_out": self.n_out,
            "hidden": self.hidden,
            "activation": self.activation,
            "init": self.init,
            "dropout": self.dropout,
            "max_messages": self.max_messages,
            "max_tokens": self.max_tokens,
            "zero_head": self.zero_head,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DeepNetConfig":
        return cls(
            emb_dim=d["emb_dim"],
            n_out=d["n_out"],
            hidden=d["hidden"],
            activation=d["activation"],
            init=d["init"],
            dropout=d["dropout"],
            max_messages=d.get("max_messages", 11),
            max_tokens=d.get("max_tokens", 40),
            zero_head=d.get("zero_head", True),
        )


@dataclass(frozen=True)
class DeepSample:
    """Embedded inputs for one (state, candidate) pair."""

    article: np.ndarray
    messages: tuple[np.ndarray, ...]
    candidate: np.ndarray


class DeepEmbedder:
    """Turns raw text into the fixed-vector sequences the net consumes."""

    def __init__(self, store: EmbeddingStore, max_messages: int = 11, max_tokens: int = 40):
        self.store = store
        self.max_messages = max_messages
        self.max_tokens = max_tokens

    def _matrix(self, text: str) -> np.ndarray:
        tokens = tokenize(text)[: self.max_tokens]
        if not tokens:
            return np.zeros((0, self.store.dimension))
        return np.stack([self.store.vector(t) for t in tokens])

    def sample(self, state: ConversationState, candidate_text: str) -> DeepSample:
        history = state.history[-self.max_messages :]
        return DeepSample(
            article=self._matrix(state.article.text),
            messages=tuple(self._matrix(m.text) for m in history),
            candidate=self._matrix(candidate_text),
        )


class DeepNet:
    def __init__(self, config: DeepNetConfig):
        self.config = config
        self.n_out = config.n_out

    def init_params(self, rng: np.random.Generator) -> Params:
        cfg = self.config
        h = cfg.hidden
        params: Params = {}
        for prefix, in_dim in (("tok", cfg.emb_dim), ("utt", h)):
            for gate in _GATES:
                params[f"{prefix}_W{gate}"] = init_weight(rng, in_dim, h, cfg.init)
                params[f"{prefix}_U{gate}"] = init_weight(rng, h, h, cfg.init)
                params[f"{prefix}_b{gate}"] = np.zeros(h)
        for prefix, in_dim in (("v", 2 * h), ("adv", 3 * h)):
            params[f"{prefix}_W1"] = init_weight(rng, in_dim, h, cfg.init)
            params[f"{prefix}_b1"] = np.zeros(h)
            if cfg.activation == "prelu":
                params[f"{prefix}_a1"] = np.array(PRELU_INIT)
            if cfg.zero_head:
                params[f"{prefix}_W2"] = np.zeros((h, cfg.n_out))
            else:
                params[f"{prefix}_W2"] = init_weight(rng, h, cfg.n_out, cfg.init)
            params[f"{prefix}_b2"] = np.zeros(cfg.n_out)
        return params

    # --- GRU primitives -------------------------------------------------

    def _gru_forward(self, params: Params, prefix: str, xs: np.ndarray):
        h = np.zeros(self.config.hidden)
        wz, uz, bz = params[f"{prefix}_Wz"], params[f"{prefix}_Uz"], params[f"{prefix}_bz"]
        wr, ur, br = params[f"{prefix}_Wr"], params[f"{prefix}_Ur"], params[f"{prefix}_br"]
        wh, uh, bh = params[f"{prefix}_Wh"], params[f"{prefix}_Uh"], params[f"{prefix}_bh"]
        steps = []
        for t in range(xs.shape[0]):
            x = xs[t]
            z = _sigmoid(x @ wz + h @ uz + bz)
            r = _sigmoid(x @ wr + h @ ur + br)
            hh = np.tanh(x @ wh + (r * h) @ uh + bh)
            steps.append((x, h, z, r, hh))
            h = (1.0 - z) * h + z * hh
        return h, steps

    def _gru_backward(
        self,
        params: Params,
        prefix: str,
        steps: list,
        dh: np.ndarray,
        grads: Params,
        need_dx: bool = False,
    ):
        uz, ur, uh = params[f"{prefix}_Uz"], params[f"{prefix}_Ur"], params[f"{prefix}_Uh"]
        wz, wr, wh = params[f"{prefix}_Wz"], params[f"{prefix}_Wr"], params[f"{prefix}_Wh"]
        dxs: list[np.ndarray | None] = [None] * len(steps)
        for t in range(len(steps) - 1, -1, -1):
            x, h_prev, z, r, hh = steps[t]
            dz = dh * (hh - h_prev)
            dhh = dh * z
            dh_prev = dh * (1.0 - z)
            dhh_pre = dhh * (1.0 - hh * hh)
            rh = r * h_prev
            grads[f"{prefix}_Wh"] += np.outer(x, dhh_pre)
            grads[f"{prefix}_Uh"] += np.outer(rh, dhh_pre)
            grads[f"{prefix}_bh"] += dhh_pre
            drh = uh @ dhh_pre
            dr = drh * h_prev
            dh_prev += drh * r
            dz_pre = dz * z * (1.0 - z)
            dr_pre = dr * r * (1.0 - r)
            grads[f"{prefix}_Wz"] += np.outer(x, dz_pre)
            grads[f"{prefix}_Uz"] += np.outer(h_prev, dz_pre)
            grads[f"{prefix}_bz"] += dz_pre
            grads[f"{prefix}_Wr"] += np.outer(x, dr_pre)
            grads[f"{prefix}_Ur"] += np.outer(h_prev, dr_pre)
            grads[f"{prefix}_br"] += dr_pre
            dh_prev += uz @ dz_pre + ur @ dr_pre
            if need_dx:
                dxs[t] = wz @ dz_pre + wr @ dr_pre + wh @ dhh_pre
            dh = dh_prev
        return dxs

    # --- heads ------------------------------------------------------------

    def _head_forward(self, params: Params, prefix: str, x: np.ndarray, train: bool, rng):
        cfg = self.config
        z1 = x @ params[f"{prefix}_W1"] + params[f"{prefix}_b1"]
        h1 = act_forward(cfg.activation, z1, params.get(f"{prefix}_a1"))
        drop = None
        h1d = h1
        if train and cfg.dropout > 0.0:
            drop = dropout_mask(rng, h1.shape, cfg.dropout)
            h1d = h1 * drop
        out = h1d @ params[f"{prefix}_W2"] + params[f"{prefix}_b2"]
        return out, (x, z1, h1d, drop)

    def _head_backward(self, params: Params, prefix: str, cache, dout: np.ndarray, grads: Params):
        cfg = self.config
        x, z1, h1d, drop = cache
        grads[f"{prefix}_W2"] += np.outer(h1d, dout)
        grads[f"{prefix}_b2"] += dout
        dh1 = params[f"{prefix}_W2"] @ dout
        if drop is not None:
            dh1 = dh1 * drop
        h1 = act_forward(cfg.activation, z1, params.get(f"{prefix}_a1"))
        dz1, dslope = act_backward(cfg.activation, z1, h1, dh1, params.get(f"{prefix}_a1"))
        if cfg.activation == "prelu":
            grads[f"{prefix}_a1"] = grads.get(f"{prefix}_a1", np.array(0.0)) + dslope
        grads[f"{prefix}_W1"] += np.outer(x, dz1)
        grads[f"{prefix}_b1"] += dz1
        return params[f"{prefix}_W1"] @ dz1

    # --- full passes --------------------------------------------------------

    def forward_one(self, params: Params, sample: DeepSample, train: bool = False, rng=None):
        h = self.config.hidden
        a_enc, a_steps = self._gru_forward(params, "tok", sample.article)
        m_encs, m_steps = [], []
        for msg in sample.messages:
            enc, st = self._gru_forward(params, "tok", msg)
            m_encs.append(enc)
            m_steps.append(st)
        utt_in = np.stack(m_encs) if m_encs else np.zeros((0, h))
        ctx_enc, u_steps = self._gru_forward(params, "utt", utt_in)
        c_enc, c_steps = self._gru_forward(params, "tok", sample.candidate)
        state_vec = np.concatenate([a_enc, ctx_enc])
        v, v_cache = self._head_forward(params, "v", state_vec, train, rng)
        adv, adv_cache = self._head_forward(
            params, "adv", np.concatenate([state_vec, c_enc]), train, rng
        )
        out = v + adv
        cache = (a_steps, m_steps, u_steps, c_steps, v_cache, adv_cache)
        return out, cache

    def backward_one(self, params: Params, cache, dout: np.ndarray, grads: Params) -> None:
        h = self.config.hidden
        a_steps, m_steps, u_steps, c_steps, v_cache, adv_cache = cache
        dstate = self._head_backward(params, "v", v_cache, dout, grads)
        dstate_c = self._head_backward(params, "adv", adv_cache, dout, grads)
        dstate = dstate + dstate_c[: 2 * h]
        dc_enc = dstate_c[2 * h :]
        da_enc, dctx = dstate[:h], dstate[h:]
        dm_encs = self._gru_backward(params, "utt", u_steps, dctx, grads, need_dx=True)
        for steps, denc in zip(m_steps, dm_encs):
            self._gru_backward(params, "tok", steps, denc, grads)
        self._gru_backward(params, "tok", a_steps, da_enc, grads)
        self._gru_backward(params, "tok", c_steps, dc_enc, grads)

    def forward_batch(self, params: Params, samples, train: bool = False, rng=None):
        outs, caches = [], []
        for s in samples:
            out, cache = self.forward_one(params, s, train, rng)
            outs.append(out)
            caches.append(cache)
        return np.stack(outs), caches

    def backward_batch(self, params: Params, caches, dout: np.ndarray) -> Params:
        grads: Params = {k: np.zeros_like(v) for k, v in params.items()}
        for cache, drow in zip(caches, dout):
            self.backward_one(params, cache, drow, grads)
        return grads

    def zero_grads(self, params: Params) -> Params:
        return {k: np.zeros_like(v) for k, v in params.items()}


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-z))
