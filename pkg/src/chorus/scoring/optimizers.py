"""First-order optimizers over named parameter dicts.

Each follows its defining formulation; shared constants are momentum 0 for
sgd, beta = (0.9, 0.999) and eps = 1e-8 for adam, rho = 0.95 and eps = 1e-6
for adadelta, decay 0.9 for rmsprop. The learning rate multiplies every
update, including adadelta's, so one search grid covers all five.
"""

from __future__ import annotations

import numpy as np

Params = dict[str, np.ndarray]


class Sgd:
    def __init__(self, lr: float):
        self.lr = lr

    def step(self, params: Params, grads: Params) -> None:
        for k, g in grads.items():
            params[k] -= self.lr * g


class Adam:
    def __init__(self, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.m: Params = {}
        self.v: Params = {}

    def step(self, params: Params, grads: Params) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for k, g in grads.items():
            m = self.m.setdefault(k, np.zeros_like(g))
            v = self.v.setdefault(k, np.zeros_like(g))
            m += (1.0 - b1) * (g - m)
            v += (1.0 - b2) * (g * g - v)
            m_hat = m / (1.0 - b1**self.t)
            v_hat = v / (1.0 - b2**self.t)
            params[k] -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


class Adagrad:
    def __init__(self, lr: float, eps: float = 1e-8):
        self.lr, self.eps = lr, eps
        self.accum: Params = {}

    def step(self, params: Params, grads: Params) -> None:
        for k, g in grads.items():
            acc = self.accum.setdefault(k, np.zeros_like(g))
            acc += g * g
            params[k] -= self.lr * g / (np.sqrt(acc) + self.eps)


class Adadelta:
    def __init__(self, lr: float, rho: float = 0.95, eps: float = 1e-6):
        self.lr, self.rho, self.eps = lr, rho, eps
        self.eg: Params = {}
        self.ex: Params = {}

    def step(self, params: Params, grads: Params) -> None:
        rho, eps = self.rho, self.eps
        for k, g in grads.items():
            eg = self.eg.setdefault(k, np.zeros_like(g))
            ex = self.ex.setdefault(k, np.zeros_like(g))
            eg += (1.0 - rho) * (g * g - eg)
            dx = -np.sqrt(ex + eps) / np.sqrt(eg + eps) * g
            ex += (1.0 - rho) * (dx * dx - ex)
            params[k] += self.lr * dx


class RmsProp:
    def __init__(self, lr: float, decay: float = 0.9, eps: float = 1e-8):
        self.lr, self.decay, self.eps = lr, decay, eps
        self.eg: Params = {}

    def step(self, params: Params, grads: Params) -> None:
        for k, g in grads.items():
            eg = self.eg.setdefault(k, np.zeros_like(g))
            eg += (1.0 - self.decay) * (g * g - eg)
            params[k] -= self.lr * g / (np.sqrt(eg) + self.eps)


_REGISTRY = {
    "sgd": Sgd,
    "adam": Adam,
    "adagrad": Adagrad,
    "adadelta": Adadelta,
    "rmsprop": RmsProp,
}

OPTIMIZER_NAMES = tuple(sorted(_REGISTRY))


def make_optimizer(name: str, lr: float):
    try:
        return _REGISTRY[name](lr)
    except KeyError:
        raise ValueError(f"unknown optimizer {name!r}, expected one of {OPTIMIZER_NAMES}") from None
