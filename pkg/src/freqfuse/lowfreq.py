"""Low-frequency branch: temporal perturbation enhancement and shared temporal context.

``lfpm_forward`` gates a seeded, grouped temporal shift by inter-frame
activity, adds a gated depthwise spatio-temporal enhancement and restores
the per-pixel temporal mean of its input. ``ltcm_fuse`` modulates both
modalities with gates computed from their pooled temporal tokens and merges
them with a convex gated fusion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DimensionError, InsufficientFramesError, ParameterError
from .nn import GatedFuse, Linear, TemporalConv, depthwise_conv3d, pointwise, relu, sigmoid, uniform
from .video import as_clip_array, check_same_shape, spatial_mean_pool


def temporal_activity(low) -> np.ndarray:
    """Per-frame, per-channel activity ``(T, C)`` from pooled inter-frame differences."""
    z = spatial_mean_pool(low)
    t = z.shape[0]
    if t < 2:
        raise InsufficientFramesError(f"temporal activity needs T >= 2, got T={t}")
    d = np.abs(np.diff(z, axis=0))
    out = np.empty_like(z)
    out[0] = d[0]
    out[-1] = d[-1]
    out[1:-1] = 0.5 * (d[:-1] + d[1:])
    return out


@dataclass(frozen=True)
class Enhancer:
    """Depthwise 3x3x3 plus spatially dilated 3x3x3 branch, then a bottleneck pointwise mix."""

    depthwise: np.ndarray  # (C, 3, 3, 3)
    dilated: np.ndarray  # (C, 3, 3, 3), spatial dilation 2
    squeeze: Linear  # C -> hidden
    expand: Linear  # hidden -> C

    @classmethod
    def init(cls, channels: int, hidden: int, rng: np.random.Generator) -> "Enhancer":
        return cls(
            uniform(rng, (channels, 3, 3, 3)),
            uniform(rng, (channels, 3, 3, 3)),
            Linear.init(channels, hidden, rng),
            Linear.init(hidden, channels, rng),
        )

    @classmethod
    def zeros(cls, channels: int, hidden: int) -> "Enhancer":
        return cls(
            np.zeros((channels, 3, 3, 3)),
            np.zeros((channels, 3, 3, 3)),
            Linear.zeros(channels, hidden),
            Linear.zeros(hidden, channels),
        )

    def __call__(self, x: np.ndarray) -> np.ndarray:
        y = depthwise_conv3d(x, self.depthwise) + depthwise_conv3d(x, self.dilated, dilation=2)
        return pointwise(relu(pointwise(y, self.squeeze)), self.expand)


@dataclass(frozen=True)
class LfpmParams:
    gate_conv: TemporalConv
    gamma_gate: TemporalConv
    gamma0: np.ndarray
    enhance: Enhancer
    beta: float = 0.5
    groups: int = 4
    max_shift: int = 1
    perturb_prob: float = 0.7
    hidden_ratio: float = 0.25
    training_mode: bool = False
    forced_shifts: tuple[int, ...] | None = field(default=None)

    def __post_init__(self) -> None:
        if not 0.0 <= self.perturb_prob <= 1.0:
            raise ParameterError(f"perturb_prob must lie in [0, 1], got {self.perturb_prob}")
        if self.max_shift < 0:
            raise ParameterError(f"max_shift must be >= 0, got {self.max_shift}")
        if self.groups < 1:
            raise ParameterError(f"groups must be >= 1, got {self.groups}")

    @property
    def channels(self) -> int:
        return self.gamma0.shape[0]

    @classmethod
    def init(
        cls,
        channels: int,
        seed: int = 0,
        *,
        random_injection: bool = False,
        **overrides,
    ) -> "LfpmParams":
        """Seeded uniform(-0.1, 0.1) weights; ``gamma0 = 0`` and ``beta = 0.5`` unless
        ``random_injection`` also draws them."""
        rng = np.random.default_rng(seed)
        hidden_ratio = overrides.get("hidden_ratio", 0.25)
        hidden = max(1, math.ceil(hidden_ratio * channels))
        gate_conv = TemporalConv.init(channels, rng)
        gamma_gate = TemporalConv.init(channels, rng)
        enhance = Enhancer.init(channels, hidden, rng)
        gamma0 = np.zeros(channels)
        if random_injection:
            gamma0 = uniform(rng, (channels,), scale=1.0)
            overrides.setdefault("beta", float(rng.uniform(0.0, 1.0)))
        return cls(gate_conv, gamma_gate, gamma0, enhance, **overrides)

    @classmethod
    def identity(cls, channels: int, **overrides) -> "LfpmParams":
        hidden = max(1, math.ceil(overrides.get("hidden_ratio", 0.25) * channels))
        overrides.setdefault("beta", 0.0)
        return cls(
            TemporalConv.zeros(channels),
            TemporalConv.zeros(channels),
            np.zeros(channels),
            Enhancer.zeros(channels, hidden),
            **overrides,
        )


def channel_groups(channels: int, groups: int) -> list[slice]:
    """Split channels into ``min(groups, C)`` contiguous groups; leftovers join the last."""
    n = min(groups, channels)
    size = channels // n
    bounds = [i * size for i in range(n)] + [channels]
    return [slice(bounds[i], bounds[i + 1]) for i in range(n)]


def draw_group_shifts(params: LfpmParams, channels: int, rng_seed: int) -> np.ndarray:
    """Per-group temporal shifts; paired groups get opposite signs, inactive groups get 0."""
    n = len(channel_groups(channels, params.groups))
    if params.forced_shifts is not None:
        if len(params.forced_shifts) != n:
            raise ParameterError(f"forced_shifts needs {n} entries, got {len(params.forced_shifts)}")
        return np.asarray(params.forced_shifts, dtype=np.int64)
    rng = np.random.default_rng(rng_seed)
    smax = params.max_shift
    shifts = np.zeros(n, dtype=np.int64)
    for j in range(0, n - 1, 2):
        s = rng.integers(-smax, smax + 1)
        shifts[j], shifts[j + 1] = s, -s
    if n % 2:
        shifts[-1] = rng.integers(-smax, smax + 1)
    active = rng.random(n) < params.perturb_prob
    return np.where(active, shifts, 0)


def shift_frames(x: np.ndarray, s: int) -> np.ndarray:
    """Non-circular temporal shift: ``out[t] = x[clamp(t - s)]``."""
    t = x.shape[0]
    idx = np.clip(np.arange(t) - s, 0, t - 1)
    return x[idx]


def temporal_shift(low, params: LfpmParams, rng_seed: int) -> np.ndarray:
    x = as_clip_array(low, "low")
    if not params.training_mode or params.max_shift == 0:
        return x.copy()
    out = x.copy()
    shifts = draw_group_shifts(params, x.shape[1], rng_seed)
    for sl, s in zip(channel_groups(x.shape[1], params.groups), shifts):
        if s:
            out[:, sl] = shift_frames(x[:, sl], int(s))
    return out


def lfpm_trace(low, params: LfpmParams, rng_seed: int = 0) -> dict[str, np.ndarray]:
    """Forward pass returning every intermediate (activity, gate, perturbed, enhanced, output)."""
    x = as_clip_array(low, "low")
    t, c, h, w = x.shape
    if c != params.channels:
        raise DimensionError(f"LFPM params built for C={params.channels}, input has C={c}")
    if h < 3 or w < 3:
        raise DimensionError(f"LFPM needs H, W >= 3, got H={h}, W={w}")
    activity = temporal_activity(x)
    gate = sigmoid(params.gate_conv(activity))
    shifted = temporal_shift(x, params, rng_seed)
    perturbed = x + params.beta * gate[:, :, None, None] * (shifted - x)
    gamma = params.gamma0 * sigmoid(params.gamma_gate(activity))
    enhanced = perturbed + gamma[:, :, None, None] * params.enhance(perturbed)
    out = enhanced - enhanced.mean(axis=0, keepdims=True) + x.mean(axis=0, keepdims=True)
    return {
        "activity": activity,
        "gate": gate,
        "gamma": gamma,
        "perturbed": perturbed,
        "enhanced": enhanced,
        "out": out,
    }


def lfpm_forward(low, params: LfpmParams, rng_seed: int = 0) -> np.ndarray:
    return lfpm_trace(low, params, rng_seed)["out"]


@dataclass(frozen=True)
class LtcmParams:
    mix_depthwise: TemporalConv  # over 2C token channels
    mix_pointwise: Linear  # 2C -> 2C
    gate_ir: Linear  # 2C -> C
    gate_vi: Linear  # 2C -> C
    fuse: GatedFuse

    @property
    def channels(self) -> int:
        return self.gate_ir.weight.shape[0]

    @classmethod
    def init(cls, channels: int, seed: int = 0) -> "LtcmParams":
        rng = np.random.default_rng(seed)
        c2 = 2 * channels
        return cls(
            TemporalConv.init(c2, rng),
            Linear.init(c2, c2, rng),
            Linear.init(c2, channels, rng),
            Linear.init(c2, channels, rng),
            GatedFuse.init(channels, rng),
        )

    @classmethod
    def zeros(cls, channels: int) -> "LtcmParams":
        c2 = 2 * channels
        return cls(
            TemporalConv.zeros(c2),
            Linear.zeros(c2, c2),
            Linear.zeros(c2, channels),
            Linear.zeros(c2, channels),
            GatedFuse.zeros(channels),
        )

    def with_fuse(self, fuse: GatedFuse) -> "LtcmParams":
        return replace(self, fuse=fuse)


def ltcm_trace(low_ir, low_vi, params: LtcmParams, fuse_gate=None) -> dict[str, np.ndarray]:
    ir = as_clip_array(low_ir, "low_ir")
    vi = as_clip_array(low_vi, "low_vi")
    check_same_shape(low_ir=ir, low_vi=vi)
    if ir.shape[1] != params.channels:
        raise DimensionError(f"LTCM params built for C={params.channels}, input has C={ir.shape[1]}")
    tokens = np.concatenate([spatial_mean_pool(ir), spatial_mean_pool(vi)], axis=1)
    context = params.mix_pointwise(params.mix_depthwise(tokens))
    mod_ir = 1.0 + sigmoid(params.gate_ir(context))
    mod_vi = 1.0 + sigmoid(params.gate_vi(context))
    bar_ir = ir * mod_ir[:, :, None, None]
    bar_vi = vi * mod_vi[:, :, None, None]
    return {
        "context": context,
        "mod_ir": mod_ir,
        "mod_vi": mod_vi,
        "bar_ir": bar_ir,
        "bar_vi": bar_vi,
        "out": params.fuse(bar_ir, bar_vi, gate=fuse_gate),
    }


def ltcm_fuse(low_ir, low_vi, params: LtcmParams, fuse_gate=None) -> np.ndarray:
    """Shared-context modulation of both modalities followed by convex gated fusion.

    ``fuse_gate`` overrides the learned gate (scalar or array broadcastable
    to the input) when given.
    """
    return ltcm_trace(low_ir, low_vi, params, fuse_gate)["out"]
