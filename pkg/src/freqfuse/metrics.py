"""Temporal fusion-quality metrics: modal mixing continuity (MMCI) and temporal
correlation preservation error (TCPE). Lower is better for both."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientFramesError, ParameterError
from .video import as_clip_array, box_mean, check_same_shape, gaussian_blur, spatial_gradients, to_grayscale


@dataclass(frozen=True)
class MmciConfig:
    mix_window: int = 7
    smooth_size: int = 9
    smooth_sigma: float = 2.0
    lambda_alpha: float = 1.0
    scale: float = 1.0
    eps: float = 1e-6

    def __post_init__(self) -> None:
        if self.mix_window < 3 or self.mix_window % 2 == 0:
            raise ParameterError(f"mix_window must be odd and >= 3, got {self.mix_window}")
        if not (self.lambda_alpha > 0 and self.scale > 0):
            raise ParameterError("lambda_alpha and scale must be positive")


@dataclass(frozen=True)
class TcpeConfig:
    window_len: int = 5
    stride: int = 1
    contrast_window: int = 7
    var_eps: float = 1e-8
    eps: float = 1e-6
    weight_override: float | None = None

    def __post_init__(self) -> None:
        if self.window_len < 3:
            raise ParameterError(f"window_len must be >= 3, got {self.window_len}")
        if self.stride < 1:
            raise ParameterError(f"stride must be >= 1, got {self.stride}")
        if self.contrast_window < 1 or self.contrast_window % 2 == 0:
            raise ParameterError(f"contrast_window must be odd, got {self.contrast_window}")


def _gray_triplet(ir, vi, fused) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    arrs = [to_grayscale(as_clip_array(x, n))[:, 0] for x, n in ((ir, "ir"), (vi, "vi"), (fused, "fused"))]
    check_same_shape(ir=arrs[0], vi=arrs[1], fused=arrs[2])
    return arrs[0], arrs[1], arrs[2]


def mixing_coefficient(ir: np.ndarray, vi: np.ndarray, fused: np.ndarray, cfg: MmciConfig) -> np.ndarray:
    """Local least-squares weight of infrared in the fused frame, clipped to [0, 1].

    ``eps`` floors the denominator, so a fused frame equal to the infrared
    source yields exactly 1 wherever the sources differ.
    """
    d = ir - vi
    area = cfg.mix_window * cfg.mix_window
    num = box_mean(d * (fused - vi), cfg.mix_window) * area
    den = box_mean(d * d, cfg.mix_window) * area
    return np.clip(num / np.maximum(den, cfg.eps), 0.0, 1.0)


def mmci(ir, vi, fused, cfg: MmciConfig | None = None) -> tuple[float, dict]:
    """Returns the index and a dict with raw/smoothed mixing maps and both terms."""
    cfg = cfg or MmciConfig()
    g_ir, g_vi, g_f = _gray_triplet(ir, vi, fused)
    t = g_ir.shape[0]
    if t < 2:
        raise InsufficientFramesError(f"MMCI needs T >= 2, got T={t}")
    alpha_raw = mixing_coefficient(g_ir, g_vi, g_f, cfg)
    alpha = gaussian_blur(alpha_raw, cfg.smooth_size, cfg.smooth_sigma)
    j_alpha = float(np.mean(np.abs(np.diff(alpha, axis=0)).mean(axis=(1, 2))))
    s_ir, s_vi, s_f = (gaussian_blur(x, cfg.smooth_size, cfg.smooth_sigma) for x in (g_ir, g_vi, g_f))
    a_bar = 0.5 * (alpha[1:] + alpha[:-1])
    resid = np.diff(s_f, axis=0) - a_bar * np.diff(s_ir, axis=0) - (1.0 - a_bar) * np.diff(s_vi, axis=0)
    j_r = float(np.mean(np.abs(resid).mean(axis=(1, 2))))
    value = cfg.scale * (j_r + cfg.lambda_alpha * j_alpha)
    return value, {"alpha_raw": alpha_raw, "alpha": alpha, "j_alpha": j_alpha, "j_r": j_r}


def local_contrast(x: np.ndarray, window: int) -> np.ndarray:
    return np.abs(x - box_mean(x, window))


def gradient_descriptor(x: np.ndarray) -> np.ndarray:
    gx, gy = spatial_gradients(x, "forward")
    return (np.abs(gx) + np.abs(gy)) / 8.0


def trajectory_distortion(a: np.ndarray, b: np.ndarray, var_eps: float) -> np.ndarray:
    """``(1 - pearson) / 2`` along axis 0 with population moments; 0.5 where either side is flat."""
    da = a - a.mean(axis=0)
    db = b - b.mean(axis=0)
    va = (da * da).mean(axis=0)
    vb = (db * db).mean(axis=0)
    cov = (da * db).mean(axis=0)
    ok = (va >= var_eps) & (vb >= var_eps)
    rho = np.where(ok, cov / np.sqrt(np.where(ok, va * vb, 1.0)), 0.0)
    rho = np.clip(rho, -1.0, 1.0)
    return np.where(ok, 0.5 * (1.0 - rho), 0.5)


def tcpe(ir, vi, fused, cfg: TcpeConfig | None = None) -> tuple[float, dict]:
    """Returns the error and per-window maps ``E``, ``d_R``, ``d_V``, ``w`` (each ``(N_W, H, W)``)."""
    cfg = cfg or TcpeConfig()
    g_ir, g_vi, g_f = _gray_triplet(ir, vi, fused)
    t = g_ir.shape[0]
    if t < cfg.window_len:
        raise InsufficientFramesError(f"TCPE needs T >= window_len={cfg.window_len}, got T={t}")
    c_ir = local_contrast(g_ir, cfg.contrast_window)
    c_f = local_contrast(g_f, cfg.contrast_window)
    gr_vi = gradient_descriptor(g_vi)
    gr_f = gradient_descriptor(g_f)
    maps = {"E": [], "d_R": [], "d_V": [], "w": []}
    for start in range(0, t - cfg.window_len + 1, cfg.stride):
        sl = slice(start, start + cfg.window_len)
        d_r = trajectory_distortion(c_ir[sl], c_f[sl], cfg.var_eps)
        d_v = trajectory_distortion(gr_vi[sl], gr_f[sl], cfg.var_eps)
        if cfg.weight_override is None:
            mc = c_ir[sl].mean(axis=0)
            mg = gr_vi[sl].mean(axis=0)
            w = mc / (mc + mg + cfg.eps)
        else:
            w = np.full(d_r.shape, float(cfg.weight_override))
        maps["E"].append(w * d_r + (1.0 - w) * d_v)
        maps["d_R"].append(d_r)
        maps["d_V"].append(d_v)
        maps["w"].append(w)
    out = {k: np.stack(v) for k, v in maps.items()}
    window_errors = out["E"].mean(axis=(1, 2))
    return float(window_errors.mean()), out
