"""Finite-difference verification of the hand-written backward passes."""

from __future__ import annotations

import numpy as np

from chorus.scoring.losses import (
    cross_entropy_grad,
    cross_entropy_loss,
    huber_grad,
    huber_loss,
    softmax,
)


def batch_loss(net, params, inputs, labels, objective: str):
    """Forward in eval mode and reduce to (scalar loss, dLoss/dlogits)."""
    out, caches = net.forward_batch(params, inputs, train=False)
    y = np.asarray(labels, dtype=np.float64)
    if objective == "reward":
        p = softmax(out)
        loss = cross_entropy_loss(p[:, 1], y)
        dp = cross_entropy_grad(p[:, 1], y)
        # chain through the two-class softmax: dlogits = J_softmax^T dp
        dlogits = np.zeros_like(out)
        dlogits[:, 1] = dp * p[:, 1] * (1.0 - p[:, 1])
        dlogits[:, 0] = -dp * p[:, 1] * p[:, 0]
        return loss, dlogits, caches
    if objective == "q":
        q = out[:, 0]
        loss = huber_loss(q, y)
        dlogits = huber_grad(q, y)[:, None]
        return loss, dlogits, caches
    raise ValueError(f"unknown objective {objective!r}")


def analytic_grads(net, params, inputs, labels, objective: str):
    _, dlogits, caches = batch_loss(net, params, inputs, labels, objective)
    return net.backward_batch(params, caches, dlogits)


def finite_difference_grads(net, params, inputs, labels, objective: str, h: float = 1e-5):
    """Central differences over every entry of every parameter tensor."""
    grads = {}
    for name, tensor in params.items():
        g = np.zeros_like(tensor)
        flat = tensor.reshape(-1) if tensor.ndim else tensor.reshape(1)
        gflat = g.reshape(-1) if g.ndim else g.reshape(1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            hi, _, _ = batch_loss(net, params, inputs, labels, objective)
            flat[i] = orig - h
            lo, _, _ = batch_loss(net, params, inputs, labels, objective)
            flat[i] = orig
            gflat[i] = (hi - lo) / (2.0 * h)
        grads[name] = g
    return grads


def relative_errors(analytic: dict, numeric: dict) -> dict[str, float]:
    """Per-tensor norm ratio ||ga - gn|| / max(||ga|| + ||gn||, tiny)."""
    out = {}
    for name in analytic:
        ga = np.asarray(analytic[name], dtype=np.float64)
        gn = np.asarray(numeric[name], dtype=np.float64)
        denom = max(float(np.linalg.norm(ga) + np.linalg.norm(gn)), 1e-12)
        out[name] = float(np.linalg.norm(ga - gn)) / denom
    return out


def check_gradients(net, params, inputs, labels, objective: str, h: float = 1e-5):
    ga = analytic_grads(net, params, inputs, labels, objective)
    gn = finite_difference_grads(net, params, inputs, labels, objective, h=h)
    return relative_errors(ga, gn)
