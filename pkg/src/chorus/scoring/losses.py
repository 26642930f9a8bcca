"""Loss functions and their gradients.

Both operate elementwise on numpy arrays and reduce by mean, so a single
(prediction, label) pair and a batch go through the same code path.
"""

from __future__ import annotations

import numpy as np

CLAMP = 1e-12


def cross_entropy_loss(p: np.ndarray, y: np.ndarray) -> float:
    """Binary cross entropy, mean over the batch.

    L = -(1/N) sum[ y log p + (1 - y) log(1 - p) ], with p clamped away from
    0 and 1 by 1e-12 so the log never sees an exact endpoint.
    """
    p = np.clip(np.asarray(p, dtype=np.float64), CLAMP, 1.0 - CLAMP)
    y = np.asarray(y, dtype=np.float64)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


def cross_entropy_grad(p: np.ndarray, y: np.ndarray) -> np.ndarray:
    """dL/dp for the mean-reduced binary cross entropy."""
    p = np.clip(np.asarray(p, dtype=np.float64), CLAMP, 1.0 - CLAMP)
    y = np.asarray(y, dtype=np.float64)
    n = p.size
    return (-(y / p) + (1.0 - y) / (1.0 - p)) / n


def huber_loss(q: np.ndarray, y: np.ndarray) -> float:
    """Huber loss with unit transition point, mean over the batch.

    0.5 * d^2 for |d| < 1, |d| - 0.5 beyond; continuously differentiable at
    the seam and its gradient magnitude never exceeds 1.
    """
    d = np.asarray(q, dtype=np.float64) - np.asarray(y, dtype=np.float64)
    a = np.abs(d)
    per = np.where(a < 1.0, 0.5 * d * d, a - 0.5)
    return float(np.mean(per))


def huber_grad(q: np.ndarray, y: np.ndarray) -> np.ndarray:
    """dL/dq for the mean-reduced Huber loss: clip(d, -1, 1) / N."""
    d = np.asarray(q, dtype=np.float64) - np.asarray(y, dtype=np.float64)
    return np.clip(d, -1.0, 1.0) / d.size


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax, shifted for stability."""
    z = np.asarray(logits, dtype=np.float64)
    z = z - np.max(z, axis=-1, keepdims=True)
    e = np.exp(z)
    return e / np.sum(e, axis=-1, keepdims=True)
