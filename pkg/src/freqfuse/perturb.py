"""Seeded clip corruptions used by the energy analysis and the metric stress bench.

Strength 0 is the identity for every family. Every generator returns the
perturbed clip together with a log of the random draws so round-trip checks
can undo them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import ndimage

from .errors import InsufficientFramesError, MissingInputError, ParameterError
from .video import as_clip_array, check_same_shape, warp_bilinear, warp_flow

FAMILIES = (
    "flicker",
    "jitter",
    "local_misalignment",
    "modality_drift",
    "temporal_shuffle",
    "mixed_hard",
)
TEMPORAL_FAMILIES = {"modality_drift", "temporal_shuffle", "local_misalignment", "mixed_hard"}

VALUE_MAX = 1.5
MISALIGN_SIGMA = 8.0
MISALIGN_TEMPORAL_SIGMA = 1.0
DRIFT_ALPHA0 = 0.5

# default stress-bench severities
SEVERITY_LEVELS = (0.5, 1.0, 1.5, 2.0, 2.5, 3.0)


@dataclass(frozen=True)
class PerturbSpec:
    family: str
    strength: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ParameterError(f"unknown perturbation family {self.family!r}; choose from {FAMILIES}")
        if not (self.strength >= 0 and np.isfinite(self.strength)):
            raise ParameterError(f"strength must be a finite non-negative number, got {self.strength}")


def flicker(clip: np.ndarray, strength: float, rng: np.random.Generator) -> tuple[np.ndarray, dict]:
    u = rng.uniform(-1.0, 1.0, size=clip.shape[0])
    gains = 1.0 + strength * 0.1 * u
    out = np.clip(clip * gains[:, None, None, None], 0.0, VALUE_MAX)
    return out, {"gains": gains.tolist()}


def jitter(clip: np.ndarray, strength: float, rng: np.random.Generator) -> tuple[np.ndarray, dict]:
    t = clip.shape[0]
    radius = strength * rng.uniform(0.0, 1.0, size=t)
    theta = rng.uniform(0.0, 2.0 * np.pi, size=t)
    shifts = np.stack([radius * np.cos(theta), radius * np.sin(theta)], axis=1)
    out = np.stack([warp_bilinear(clip[i], shifts[i]) for i in range(t)])
    return out, {"shifts": shifts.tolist()}


def displacement_field(shape: tuple[int, int, int], peak: float, rng: np.random.Generator) -> np.ndarray:
    """Smooth ``(T, 2, H, W)`` displacement field whose largest magnitude equals ``peak``."""
    t, h, w = shape
    noise = rng.standard_normal((t, 2, h, w))
    field = ndimage.gaussian_filter(
        noise,
        sigma=(MISALIGN_TEMPORAL_SIGMA, 0.0, MISALIGN_SIGMA, MISALIGN_SIGMA),
        mode=("reflect", "nearest", "wrap", "wrap"),  # periodic in space keeps the field stationary
    )
    mag = np.sqrt(field[:, 0] ** 2 + field[:, 1] ** 2).max()
    if mag <= 0:
        return np.zeros_like(field)
    return field * (peak / mag)


def local_misalignment(clip: np.ndarray, strength: float, rng: np.random.Generator) -> tuple[np.ndarray, dict]:
    t, _, h, w = clip.shape
    field = displacement_field((t, h, w), strength, rng)
    out = np.stack([warp_flow(clip[i], field[i, 0], field[i, 1]) for i in range(t)])
    peaks = np.sqrt(field[:, 0] ** 2 + field[:, 1] ** 2).max(axis=(1, 2))
    return out, {"peak_per_frame": peaks.tolist()}


def modality_drift(
    fused: np.ndarray, strength: float, ir: np.ndarray, vi: np.ndarray
) -> tuple[np.ndarray, dict]:
    t = fused.shape[0]
    target = np.clip(DRIFT_ALPHA0 + strength * 0.1 * np.arange(t) / t, 0.0, 1.0)
    delta = target - DRIFT_ALPHA0
    out = fused + delta[:, None, None, None] * (ir - vi)
    return np.clip(out, 0.0, VALUE_MAX), {"blend_offset": delta.tolist()}


def shuffle_window(strength: float, t: int) -> int:
    return min(t, 2 + int(np.floor(strength + 0.5)))


def temporal_shuffle(clip: np.ndarray, strength: float, rng: np.random.Generator) -> tuple[np.ndarray, dict]:
    t = clip.shape[0]
    win = shuffle_window(strength, t)
    order = np.arange(t)
    for start in range(0, t, win):
        n = min(win, t - start)
        if n < 2:
            continue
        perm = rng.permutation(n)
        while np.all(perm == np.arange(n)):
            perm = rng.permutation(n)
        order[start : start + n] = start + perm
    return clip[order].copy(), {"window": win, "order": order.tolist()}


def mixed_hard(clip: np.ndarray, strength: float, rng: np.random.Generator) -> tuple[np.ndarray, dict]:
    seeds = rng.integers(0, 2**32, size=4)
    out, log_m = local_misalignment(clip, 0.6 * strength, np.random.default_rng(seeds[0]))
    out, log_f = flicker(out, 0.8 * strength, np.random.default_rng(seeds[1]))
    out, log_j = jitter(out, 0.4 * strength, np.random.default_rng(seeds[2]))
    noise = np.random.default_rng(seeds[3]).standard_normal(out.shape) * (0.01 * strength)
    out = np.clip(out + noise, 0.0, VALUE_MAX)
    return out, {"local_misalignment": log_m, "flicker": log_f, "jitter": log_j}


_SINGLE: dict[str, Callable] = {
    "flicker": flicker,
    "jitter": jitter,
    "local_misalignment": local_misalignment,
    "temporal_shuffle": temporal_shuffle,
    "mixed_hard": mixed_hard,
}


def apply_logged(clip, spec: PerturbSpec, sources=None) -> tuple[np.ndarray, dict]:
    """Apply ``spec`` to ``clip``; ``sources=(ir, vi)`` is required for modality drift."""
    arr = as_clip_array(clip)
    log: dict = {"family": spec.family, "strength": spec.strength, "seed": spec.seed}
    if spec.family == "modality_drift" and sources is None:
        raise MissingInputError("modality_drift needs the (ir, vi) source clips")
    if spec.family in TEMPORAL_FAMILIES and arr.shape[0] < 2:
        raise InsufficientFramesError(f"{spec.family} needs T >= 2, got T={arr.shape[0]}")
    if spec.strength == 0:
        return arr.copy(), log
    if spec.family == "modality_drift":
        ir, vi = (as_clip_array(s, n) for s, n in zip(sources, ("ir", "vi")))
        check_same_shape(fused=arr, ir=ir, vi=vi)
        out, extra = modality_drift(arr, spec.strength, ir, vi)
    else:
        rng = np.random.default_rng(spec.seed)
        out, extra = _SINGLE[spec.family](arr, spec.strength, rng)
    log.update(extra)
    return out, log


def apply(clip, spec: PerturbSpec, sources=None) -> np.ndarray:
    return apply_logged(clip, spec, sources)[0]
