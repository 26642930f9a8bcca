"""Shared pieces for the two scorer architectures."""

from __future__ import annotations

import numpy as np

ACTIVATIONS = ("sigmoid", "relu", "prelu")
INITS = ("he", "glorot")

PRELU_INIT = 0.25


def init_weight(rng: np.random.Generator, fan_in: int, fan_out: int, scheme: str) -> np.ndarray:
    if scheme == "he":
        return rng.standard_normal((fan_in, fan_out)) * np.sqrt(2.0 / fan_in)
    if scheme == "glorot":
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-bound, bound, size=(fan_in, fan_out))
    raise ValueError(f"unknown init {scheme!r}, expected one of {INITS}")


def act_forward(name: str, z: np.ndarray, slope: np.ndarray | None) -> np.ndarray:
    if name == "sigmoid":
        return 1.0 / (1.0 + np.exp(-z))
    if name == "relu":
        return np.maximum(0.0, z)
    if name == "prelu":
        return np.where(z > 0.0, z, slope * z)
    raise ValueError(f"unknown activation {name!r}, expected one of {ACTIVATIONS}")


def act_backward(
    name: str, z: np.ndarray, h: np.ndarray, dh: np.ndarray, slope: np.ndarray | None
) -> tuple[np.ndarray, float]:
    """Return (dz, dslope). dslope is 0.0 unless the activation is prelu."""
    if name == "sigmoid":
        return dh * h * (1.0 - h), 0.0
    if name == "relu":
        return dh * (z > 0.0), 0.0
    if name == "prelu":
        dz = dh * np.where(z > 0.0, 1.0, slope)
        dslope = float(np.sum(dh * np.where(z > 0.0, 0.0, z)))
        return dz, dslope
    raise ValueError(f"unknown activation {name!r}")


def dropout_mask(rng: np.random.Generator, shape, rate: float) -> np.ndarray:
    """Inverted dropout mask: zeros with probability rate, survivors scaled."""
    keep = 1.0 - rate
    return (rng.random(shape) < keep).astype(np.float64) / keep


def copy_params(params: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    return {k: v.copy() for k, v in params.items()}
