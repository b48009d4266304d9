"""Frame-sequence data model and the shared numerical kernels.

All clip arrays use the ``(T, C, H, W)`` layout. Kernels compute in float64
and return float64 arrays; :class:`VideoClip` is the float32 carrier used at
the I/O boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import ndimage

from .errors import DimensionError, ParameterError, UnsupportedChannelsError

LUMA_WEIGHTS = (0.299, 0.587, 0.114)
_TAP_QUANTUM = 2.0**40


@dataclass(frozen=True)
class VideoClip:
    """Dense ``T x C x H x W`` float32 frame sequence, nominally in [0, 1]."""

    frames: np.ndarray

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(self.frames, dtype=np.float32)
        if arr.ndim != 4:
            raise DimensionError(f"clip must be 4-D (T, C, H, W), got shape {arr.shape}")
        if min(arr.shape) < 1:
            raise DimensionError(f"clip dimensions must be positive, got {arr.shape}")
        if arr.shape[1] not in (1, 3):
            raise UnsupportedChannelsError(f"clip must have 1 or 3 channels, got C={arr.shape[1]}")
        if not np.all(np.isfinite(arr)):
            raise DimensionError("clip contains non-finite values")
        arr.setflags(write=False)
        object.__setattr__(self, "frames", arr)

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return self.frames.shape  # type: ignore[return-value]

    @property
    def t(self) -> int:
        return self.frames.shape[0]

    @property
    def c(self) -> int:
        return self.frames.shape[1]

    @property
    def h(self) -> int:
        return self.frames.shape[2]

    @property
    def w(self) -> int:
        return self.frames.shape[3]

    def __array__(self, dtype=None, copy=None):
        return self.frames if dtype is None else self.frames.astype(dtype)


def as_clip_array(clip, name: str = "clip") -> np.ndarray:
    """Return ``clip`` as a float64 ``(T, C, H, W)`` array."""
    arr = np.asarray(clip, dtype=np.float64)
    if arr.ndim != 4:
        raise DimensionError(f"{name} must be 4-D (T, C, H, W), got shape {arr.shape}")
    return arr


def check_same_shape(**clips: np.ndarray) -> None:
    shapes = {name: np.shape(c) for name, c in clips.items()}
    if len(set(shapes.values())) > 1:
        desc = ", ".join(f"{k}={v}" for k, v in shapes.items())
        raise DimensionError(f"shape mismatch: {desc}")


def to_grayscale(clip) -> np.ndarray:
    """Map a 3-channel clip to luma; 1-channel clips pass through unchanged."""
    arr = as_clip_array(clip)
    c = arr.shape[1]
    if c == 1:
        return arr.copy()
    if c != 3:
        raise UnsupportedChannelsError(f"to_grayscale expects C in {{1, 3}}, got C={c}")
    r, g, b = LUMA_WEIGHTS
    return (r * arr[:, 0] + g * arr[:, 1] + b * arr[:, 2])[:, None]


@dataclass(frozen=True)
class Kernel2D:
    taps: np.ndarray

    def __post_init__(self) -> None:
        taps = np.asarray(self.taps, dtype=np.float64)
        if taps.ndim != 2 or taps.shape[0] != taps.shape[1] or taps.shape[0] % 2 == 0:
            raise ParameterError(f"kernel must be square with odd size, got {taps.shape}")
        object.__setattr__(self, "taps", taps)

    @property
    def size(self) -> int:
        return self.taps.shape[0]

    @property
    def normalization(self) -> float:
        return float(self.taps.sum())

    @classmethod
    def gaussian(cls, size: int = 9, sigma: float = 2.0) -> "Kernel2D":
        g = gaussian_taps_1d(size, sigma)
        return cls(np.outer(g, g))


def gaussian_taps_1d(size: int, sigma: float) -> np.ndarray:
    if size < 1 or size % 2 == 0:
        raise ParameterError(f"Gaussian kernel size must be odd and positive, got {size}")
    if not sigma > 0:
        raise ParameterError(f"Gaussian sigma must be positive, got {sigma}")
    x = np.arange(size, dtype=np.float64) - size // 2
    g = np.exp(-(x**2) / (2.0 * sigma**2))
    g /= g.sum()
    # snap taps to multiples of 2**-40 and put the residue on the centre tap:
    # filter sums are then exact, so constant planes are reproduced bit for bit
    q = np.round(g * _TAP_QUANTUM) / _TAP_QUANTUM
    q[size // 2] += 1.0 - q.sum()
    return q


def filter2d(x, kernel: Kernel2D) -> np.ndarray:
    """Correlate the trailing two axes with ``kernel`` using replicate padding."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim < 2:
        raise DimensionError(f"filter2d needs at least 2 dimensions, got {arr.shape}")
    weights = kernel.taps.reshape((1,) * (arr.ndim - 2) + kernel.taps.shape)
    return ndimage.correlate(arr, weights, mode="nearest")


def gaussian_blur(x, size: int = 9, sigma: float = 2.0) -> np.ndarray:
    """Separable normalized Gaussian blur over the trailing two axes, replicate boundary."""
    g = gaussian_taps_1d(size, sigma)
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim < 2:
        raise DimensionError(f"gaussian_blur needs at least 2 dimensions, got {arr.shape}")
    out = ndimage.correlate1d(arr, g, axis=-1, mode="nearest")
    return ndimage.correlate1d(out, g, axis=-2, mode="nearest")


def box_mean(x, size: int) -> np.ndarray:
    """Mean over a ``size x size`` window on the trailing axes, replicate boundary."""
    if size < 1 or size % 2 == 0:
        raise ParameterError(f"window size must be odd and positive, got {size}")
    arr = np.asarray(x, dtype=np.float64)
    k = np.full(size, 1.0 / size)
    out = ndimage.correlate1d(arr, k, axis=-1, mode="nearest")
    return ndimage.correlate1d(out, k, axis=-2, mode="nearest")


def spatial_gradients(
    frame, scheme: Literal["central", "forward"] = "central"
) -> tuple[np.ndarray, np.ndarray]:
    """Finite differences along x (last axis) and y (second to last), replicate boundary.

    ``central`` returns ``0.5 * (f[i+1] - f[i-1])``; ``forward`` returns
    ``f[i+1] - f[i]`` (zero on the last row/column).
    """
    arr = np.asarray(frame, dtype=np.float64)
    if arr.ndim < 2 or arr.shape[-1] < 2 or arr.shape[-2] < 2:
        raise DimensionError(f"spatial_gradients needs H, W >= 2, got shape {arr.shape}")
    pad = [(0, 0)] * (arr.ndim - 2) + [(1, 1), (1, 1)]
    p = np.pad(arr, pad, mode="edge")
    if scheme == "central":
        gx = 0.5 * (p[..., 1:-1, 2:] - p[..., 1:-1, :-2])
        gy = 0.5 * (p[..., 2:, 1:-1] - p[..., :-2, 1:-1])
    elif scheme == "forward":
        gx = p[..., 1:-1, 2:] - p[..., 1:-1, 1:-1]
        gy = p[..., 2:, 1:-1] - p[..., 1:-1, 1:-1]
    else:
        raise ParameterError(f"unknown gradient scheme {scheme!r}")
    return gx, gy


def sample_bilinear(frame, xs, ys) -> np.ndarray:
    """Bilinear lookup of ``frame[..., ys, xs]`` with coordinates clamped to the border."""
    arr = np.asarray(frame, dtype=np.float64)
    h, w = arr.shape[-2:]
    xs = np.clip(np.asarray(xs, dtype=np.float64), 0.0, w - 1)
    ys = np.clip(np.asarray(ys, dtype=np.float64), 0.0, h - 1)
    x0 = np.floor(xs).astype(np.intp)
    y0 = np.floor(ys).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = xs - x0
    fy = ys - y0
    top = arr[..., y0, x0] * (1.0 - fx) + arr[..., y0, x1] * fx
    bot = arr[..., y1, x0] * (1.0 - fx) + arr[..., y1, x1] * fx
    return top * (1.0 - fy) + bot * fy


def warp_bilinear(frame, shift: tuple[float, float]) -> np.ndarray:
    """Translate the trailing ``H x W`` plane by ``shift = (u, v)`` pixels.

    Output pixel ``(x, y)`` reads the input at ``(x - u, y - v)``; reads
    outside the frame clamp to the border.
    """
    u, v = float(shift[0]), float(shift[1])
    if not (np.isfinite(u) and np.isfinite(v)):
        raise ParameterError(f"warp shift must be finite, got {shift}")
    arr = np.asarray(frame, dtype=np.float64)
    if u == 0.0 and v == 0.0:
        return arr.copy()
    h, w = arr.shape[-2:]
    ys, xs = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij")
    return sample_bilinear(arr, xs - u, ys - v)


def warp_flow(frame, flow_x: np.ndarray, flow_y: np.ndarray) -> np.ndarray:
    """Per-pixel version of :func:`warp_bilinear`; flows have the frame's ``H x W`` shape."""
    arr = np.asarray(frame, dtype=np.float64)
    h, w = arr.shape[-2:]
    ys, xs = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij")
    return sample_bilinear(arr, xs - flow_x, ys - flow_y)


def shift_integer(frame, u: int, v: int) -> np.ndarray:
    """Integer translation with replicate padding; same convention as :func:`warp_bilinear`."""
    arr = np.asarray(frame, dtype=np.float64)
    h, w = arr.shape[-2:]
    rows = np.clip(np.arange(h) - v, 0, h - 1)
    cols = np.clip(np.arange(w) - u, 0, w - 1)
    return arr[..., rows[:, None], cols[None, :]]


def normalize_frames(x, eps: float = 1e-6) -> np.ndarray:
    """Center each trailing ``H x W`` plane by its mean and divide by ``std + eps``."""
    arr = np.asarray(x, dtype=np.float64)
    mu = arr.mean(axis=(-2, -1), keepdims=True)
    sd = arr.std(axis=(-2, -1), keepdims=True)
    out = (arr - mu) / (sd + eps)
    # the mean of a constant plane can miss its value by an ulp; flat planes map to 0 exactly
    flat = np.ptp(arr, axis=(-2, -1), keepdims=True) == 0
    return np.where(flat, 0.0, out)


def spatial_mean_pool(clip) -> np.ndarray:
    """Per-frame, per-channel spatial mean: ``(T, C, H, W) -> (T, C)``."""
    arr = as_clip_array(clip)
    return arr.mean(axis=(2, 3))
