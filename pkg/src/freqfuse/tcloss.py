"""Offset-aware temporal consistency loss on low-frequency grayscale projections.

For each neighbour frame ``i`` of the centre frame ``c = T // 2`` the loss
estimates a soft sub-pixel shift per modality, fuses the source shifts by
entropy confidence into a reference, and compares the fused clip's shift and
its aligned residual ``W(L_i, shift) - L_c`` (plus the residual's gradients)
with the confidence-weighted source residuals.

Shift convention: ``shift`` maps frame ``i`` onto frame ``c`` under
:func:`freqfuse.video.warp_bilinear`, i.e. ``warp(L_i, shift) ~= L_c``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Mapping

import numpy as np

from .errors import DimensionError, InsufficientFramesError, ParameterError
from .video import (
    as_clip_array,
    gaussian_blur,
    normalize_frames,
    shift_integer,
    spatial_gradients,
    to_grayscale,
    warp_bilinear,
)


@dataclass(frozen=True)
class TcConfig:
    blur_size: int = 9
    blur_sigma: float = 2.0
    search_radius: int = 2
    charbonnier_eps: float = 1e-3
    softmax_temp: float = 0.15
    conf_gain: float = 8.0
    w_shift: float = 2.0
    w_align: float = 1.0
    w_grad: float = 0.3
    huber_delta: float = 1.0
    norm_eps: float = 1e-6

    def __post_init__(self) -> None:
        if not self.softmax_temp > 0:
            raise ParameterError(f"softmax_temp must be > 0, got {self.softmax_temp}")
        if not self.charbonnier_eps > 0:
            raise ParameterError(f"charbonnier_eps must be > 0, got {self.charbonnier_eps}")
        if self.search_radius < 1:
            raise ParameterError(f"search_radius must be >= 1, got {self.search_radius}")


@dataclass(frozen=True)
class OffsetEstimate:
    shift: tuple[float, float]
    distribution: np.ndarray  # (2r+1, 2r+1) indexed [v + r, u + r]
    cost_map: np.ndarray  # same layout
    confidence: float

    def argmin_shift(self) -> tuple[int, int]:
        r = self.cost_map.shape[0] // 2
        iv, iu = np.unravel_index(int(np.argmin(self.cost_map)), self.cost_map.shape)
        return int(iu) - r, int(iv) - r


@dataclass
class TcBreakdown:
    l_shift: float
    l_align: float
    l_grad: float
    total: float
    center: int
    per_neighbor: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def charbonnier(x, eps: float) -> np.ndarray:
    return np.sqrt(np.square(x) + eps * eps)


def huber(x, delta: float = 1.0) -> np.ndarray:
    a = np.abs(x)
    return np.where(a < delta, 0.5 * a * a, delta * (a - 0.5 * delta))


def lowfreq_project(clip, cfg: TcConfig | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Grayscale -> Gaussian blur -> per-frame normalisation; both outputs are ``(T, H, W)``."""
    cfg = cfg or TcConfig()
    arr = as_clip_array(clip)
    if arr.shape[0] < 2:
        raise InsufficientFramesError(f"lowfreq_project needs T >= 2, got T={arr.shape[0]}")
    low = gaussian_blur(to_grayscale(arr)[:, 0], cfg.blur_size, cfg.blur_sigma)
    return low, normalize_frames(low, cfg.norm_eps)


def cost_map(frame_i: np.ndarray, frame_c: np.ndarray, radius: int, eps: float) -> np.ndarray:
    n = 2 * radius + 1
    costs = np.empty((n, n))
    for v in range(-radius, radius + 1):
        for u in range(-radius, radius + 1):
            diff = shift_integer(frame_i, u, v) - frame_c
            costs[v + radius, u + radius] = charbonnier(diff, eps).mean()
    return costs


def _expected_offset(marginal: np.ndarray, r: int) -> float:
    # pair +k with -k so a symmetric marginal gives exactly 0
    return float(sum(k * (marginal[r + k] - marginal[r - k]) for k in range(1, r + 1)))


def estimate_shift(frame_i, frame_c, cfg: TcConfig | None = None) -> OffsetEstimate:
    cfg = cfg or TcConfig()
    fi = np.asarray(frame_i, dtype=np.float64)
    fc = np.asarray(frame_c, dtype=np.float64)
    r = cfg.search_radius
    if min(fi.shape) <= 2 * r:
        raise ParameterError(f"frames of shape {fi.shape} are too small for search radius {r}")
    costs = cost_map(fi, fc, r, cfg.charbonnier_eps)
    logits = -costs / cfg.softmax_temp
    logits -= logits.max()
    p = np.exp(logits)
    p /= p.sum()
    u = _expected_offset(p.sum(axis=0), r)
    v = _expected_offset(p.sum(axis=1), r)
    nz = p[p > 0]
    entropy = float(-(nz * np.log(nz)).sum())
    conf = min(1.0, max(0.0, 1.0 - entropy / math.log(p.size)))
    if np.ptp(p) == 0:
        conf = 0.0  # uniform: entropy equals its maximum up to rounding
    return OffsetEstimate(shift=(u, v), distribution=p, cost_map=costs, confidence=conf)


def modality_weights(conf_vi: float, conf_ir: float, gamma: float = 8.0) -> tuple[float, float]:
    a, b = gamma * conf_vi, gamma * conf_ir
    m = max(a, b)
    ea, eb = math.exp(a - m), math.exp(b - m)
    return ea / (ea + eb), eb / (ea + eb)


def tc_loss(
    fused,
    vi,
    ir,
    cfg: TcConfig | None = None,
    force_weights: tuple[float, float] | None = None,
) -> TcBreakdown:
    """Weighted sum of shift supervision, residual alignment and residual-gradient terms.

    ``force_weights=(w_vi, w_ir)`` bypasses the confidence softmax.
    """
    cfg = cfg or TcConfig()
    f_arr, vi_arr, ir_arr = (as_clip_array(x, n) for x, n in ((fused, "fused"), (vi, "vi"), (ir, "ir")))
    t = f_arr.shape[0]
    # channel counts may differ (RGB fused vs gray infrared); compare T, H, W only
    thw = {n: (a.shape[0],) + a.shape[2:] for n, a in (("fused", f_arr), ("vi", vi_arr), ("ir", ir_arr))}
    if len(set(thw.values())) > 1:
        raise DimensionError("shape mismatch (T, H, W): " + ", ".join(f"{k}={v}" for k, v in thw.items()))
    if t < 3:
        raise InsufficientFramesError(f"tc_loss needs T >= 3, got T={t}")
    low = {}
    norm = {}
    for name, arr in (("f", f_arr), ("vi", vi_arr), ("ir", ir_arr)):
        low[name], norm[name] = lowfreq_project(arr, cfg)
    c = t // 2
    eps = cfg.charbonnier_eps
    shift_terms, align_terms, grad_terms, rows = [], [], [], []
    for i in range(t):
        if i == c:
            continue
        est = {m: estimate_shift(norm[m][i], norm[m][c], cfg) for m in ("f", "vi", "ir")}
        if force_weights is None:
            w_vi, w_ir = modality_weights(est["vi"].confidence, est["ir"].confidence, cfg.conf_gain)
        else:
            w_vi, w_ir = force_weights
        ref = w_vi * np.asarray(est["vi"].shift) + w_ir * np.asarray(est["ir"].shift)
        shift_terms.append(float(huber(np.asarray(est["f"].shift) - ref, cfg.huber_delta).mean()))

        def residual(m: str) -> np.ndarray:
            return warp_bilinear(low[m][i], ref) - low[m][c]

        r_f = residual("f")
        r_ref = w_vi * residual("vi") + w_ir * residual("ir")
        diff = r_f - r_ref
        align_terms.append(float(charbonnier(diff, eps).mean()))
        gx, gy = spatial_gradients(diff, "central")
        grad_terms.append(0.5 * (float(charbonnier(gx, eps).mean()) + float(charbonnier(gy, eps).mean())))
        rows.append(
            {
                "frame": i,
                "shift_fused": list(est["f"].shift),
                "shift_vi": list(est["vi"].shift),
                "shift_ir": list(est["ir"].shift),
                "shift_ref": ref.tolist(),
                "conf_fused": est["f"].confidence,
                "conf_vi": est["vi"].confidence,
                "conf_ir": est["ir"].confidence,
                "w_vi": w_vi,
                "w_ir": w_ir,
                "residual_l1_fused": float(np.abs(r_f).mean()),
                "residual_l1_ref": float(np.abs(r_ref).mean()),
            }
        )
    l_shift = float(np.mean(shift_terms))
    l_align = float(np.mean(align_terms))
    l_grad = float(np.mean(grad_terms))
    total = cfg.w_shift * l_shift + cfg.w_align * l_align + cfg.w_grad * l_grad
    return TcBreakdown(l_shift, l_align, l_grad, total, c, rows)


def composite_objective(
    l_tc: float, lambda_tc: float, extra_terms: Mapping[str, tuple[float, float]] | None = None
) -> float:
    """``lambda_tc * l_tc`` plus caller-supplied ``name -> (weight, value)`` terms.

    Intensity, gradient and colour losses are computed elsewhere and passed in.
    """
    total = lambda_tc * l_tc
    for weight, value in (extra_terms or {}).values():
        total += weight * value
    return total
