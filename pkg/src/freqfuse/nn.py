"""Minimal forward-only layers on ``(T, C, H, W)`` arrays.

Everything is plain numpy with replicate padding on every axis. Weights are
stored in dataclasses so forward passes stay pure functions of
``(input, params)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def sigmoid(x):
    x = np.asarray(x, dtype=np.float64)
    # branch on sign to avoid exp overflow
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def softmax(x, axis: int = -1) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    z = x - x.max(axis=axis, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=axis, keepdims=True)


def relu(x):
    return np.maximum(x, 0.0)


def uniform(rng: np.random.Generator, shape, scale: float = 0.1) -> np.ndarray:
    return rng.uniform(-scale, scale, size=shape)


@dataclass(frozen=True)
class TemporalConv:
    """Depthwise 1-D temporal convolution, kernel 3, on ``(T, C)`` sequences."""

    weight: np.ndarray  # (C, 3): taps for t-1, t, t+1
    bias: np.ndarray  # (C,)

    @classmethod
    def init(cls, channels: int, rng: np.random.Generator) -> "TemporalConv":
        return cls(uniform(rng, (channels, 3)), uniform(rng, (channels,)))

    @classmethod
    def zeros(cls, channels: int) -> "TemporalConv":
        return cls(np.zeros((channels, 3)), np.zeros(channels))

    def __call__(self, seq: np.ndarray) -> np.ndarray:
        p = np.concatenate([seq[:1], seq, seq[-1:]], axis=0)
        w = self.weight
        return p[:-2] * w[:, 0] + p[1:-1] * w[:, 1] + p[2:] * w[:, 2] + self.bias


@dataclass(frozen=True)
class Linear:
    """Dense map on the last axis: ``y = x @ weight.T + bias``."""

    weight: np.ndarray  # (out, in)
    bias: np.ndarray  # (out,)

    @classmethod
    def init(cls, n_in: int, n_out: int, rng: np.random.Generator) -> "Linear":
        return cls(uniform(rng, (n_out, n_in)), uniform(rng, (n_out,)))

    @classmethod
    def zeros(cls, n_in: int, n_out: int) -> "Linear":
        return cls(np.zeros((n_out, n_in)), np.zeros(n_out))

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return x @ self.weight.T + self.bias


def pointwise(x: np.ndarray, layer: Linear) -> np.ndarray:
    """1x1(x1) channel mixing on a ``(T, C, H, W)`` array."""
    y = np.einsum("oc,tchw->tohw", layer.weight, x)
    return y + layer.bias[None, :, None, None]


def depthwise_conv3d(x: np.ndarray, weight: np.ndarray, dilation: int = 1) -> np.ndarray:
    """Depthwise 3x3x3 convolution (cross-correlation) over ``(T, H, W)`` per channel.

    ``weight`` has shape ``(C, 3, 3, 3)`` indexed ``[c, dt, dy, dx]``; the
    spatial taps are ``dilation`` pixels apart, the temporal taps one frame.
    """
    d = dilation
    p = np.pad(x, ((1, 1), (0, 0), (d, d), (d, d)), mode="edge")
    t, _, h, w = x.shape
    out = np.zeros_like(x, dtype=np.float64)
    for dt in range(3):
        for dy in range(3):
            for dx in range(3):
                tap = weight[:, dt, dy, dx][None, :, None, None]
                out += tap * p[dt : dt + t, :, dy * d : dy * d + h, dx * d : dx * d + w]
    return out


@dataclass(frozen=True)
class LocalBlock:
    """Depthwise 3x3x3 convolution followed by a pointwise channel mix."""

    depthwise: np.ndarray  # (C, 3, 3, 3)
    mix: Linear  # C -> C

    @classmethod
    def init(cls, channels: int, rng: np.random.Generator) -> "LocalBlock":
        return cls(uniform(rng, (channels, 3, 3, 3)), Linear.init(channels, channels, rng))

    @classmethod
    def zeros(cls, channels: int) -> "LocalBlock":
        return cls(np.zeros((channels, 3, 3, 3)), Linear.zeros(channels, channels))

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return pointwise(depthwise_conv3d(x, self.depthwise), self.mix)


@dataclass(frozen=True)
class GatedFuse:
    """Convex per-position gate ``g = sigmoid(W [a; b] + bias)``; returns ``g*a + (1-g)*b``."""

    gate: Linear  # 2C -> C

    @classmethod
    def init(cls, channels: int, rng: np.random.Generator) -> "GatedFuse":
        return cls(Linear.init(2 * channels, channels, rng))

    @classmethod
    def zeros(cls, channels: int) -> "GatedFuse":
        return cls(Linear.zeros(2 * channels, channels))

    def gate_map(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return sigmoid(pointwise(np.concatenate([a, b], axis=1), self.gate))

    def __call__(self, a: np.ndarray, b: np.ndarray, gate: np.ndarray | float | None = None) -> np.ndarray:
        g = self.gate_map(a, b) if gate is None else gate
        return g * a + (1.0 - g) * b
