"""Seeded synthetic clips: power-law textures drifting with sub-pixel motion
under slow intensity modulation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .video import sample_bilinear


@dataclass(frozen=True)
class SceneSpec:
    t: int = 16
    h: int = 32
    w: int = 32
    speed: tuple[float, float] = (0.4, 1.2)  # px / frame, drawn uniformly
    common_gain_amp: float = 0.0  # scene-wide modulation shared by both sources
    ir_gain_amp: float = 0.15  # independent thermal modulation
    vi_gain_amp: float = 0.0  # independent illumination modulation
    cycles: float = 0.5  # modulation periods over the clip


# moving textures; used by the energy analysis
MOTION_SCENE = SceneSpec()
# static camera under slow scene-wide intensity drift; temporal order is carried
# by smooth per-pixel trajectories, which the shuffle family then destroys
STATIC_DRIFT_SCENE = SceneSpec(t=64, speed=(0.0, 0.0), common_gain_amp=0.3, ir_gain_amp=0.0, cycles=1.0)


def powerlaw_texture(rng: np.random.Generator, h: int, w: int, exponent: float = 2.0) -> np.ndarray:
    """Random field with ``1/f**exponent`` power spectrum, rescaled to [0, 1]."""
    fy = np.fft.fftfreq(h)[:, None]
    fx = np.fft.fftfreq(w)[None, :]
    f = np.sqrt(fx**2 + fy**2)
    f[0, 0] = 1.0
    amp = f ** (-exponent / 2.0)
    amp[0, 0] = 0.0
    phase = np.fft.fft2(rng.standard_normal((h, w)))
    field = np.real(np.fft.ifft2(phase * amp))
    field -= field.min()
    return field / field.max()


def drifting_clip(
    texture: np.ndarray,
    t: int,
    h: int,
    w: int,
    velocity: tuple[float, float],
    origin: tuple[float, float] = (0.0, 0.0),
) -> np.ndarray:
    """Crop a ``(t, 1, h, w)`` clip from ``texture`` moving by ``velocity`` px per frame."""
    ys, xs = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij")
    frames = []
    for i in range(t):
        ox = origin[0] + velocity[0] * i
        oy = origin[1] + velocity[1] * i
        frames.append(sample_bilinear(texture, xs + ox, ys + oy))
    return np.stack(frames)[:, None]


def _modulation(rng: np.random.Generator, t: int, amp: float, cycles: float) -> np.ndarray:
    phase = rng.uniform(0.0, 2.0 * np.pi)
    return 1.0 + amp * np.sin(2.0 * np.pi * cycles * np.arange(t) / t + phase)


def source_pair(seed: int, scene: SceneSpec | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Infrared-like (smooth, blobby) and visible-like (fine texture) clips sharing one motion."""
    sc = scene or SceneSpec()
    rng = np.random.default_rng(seed)
    margin = 8 + int(np.ceil(sc.speed[1] * sc.t))
    big_h, big_w = sc.h + 2 * margin, sc.w + 2 * margin
    ir_tex = powerlaw_texture(rng, big_h, big_w, exponent=3.0)
    vi_tex = powerlaw_texture(rng, big_h, big_w, exponent=1.6)
    angle = rng.uniform(0.0, 2.0 * np.pi)
    speed = rng.uniform(*sc.speed)
    vel = (speed * np.cos(angle), speed * np.sin(angle))
    origin = (float(margin), float(margin))
    ir = drifting_clip(ir_tex, sc.t, sc.h, sc.w, vel, origin)
    vi = drifting_clip(vi_tex, sc.t, sc.h, sc.w, vel, origin)
    common = _modulation(rng, sc.t, sc.common_gain_amp, sc.cycles) - 1.0
    g_ir = (_modulation(rng, sc.t, sc.ir_gain_amp, sc.cycles) + common)[:, None, None, None]
    g_vi = (_modulation(rng, sc.t, sc.vi_gain_amp, sc.cycles) + common)[:, None, None, None]
    ir = np.clip(0.1 + 0.7 * ir * g_ir, 0.0, 1.0)
    vi = np.clip(0.05 + 0.75 * vi * g_vi, 0.0, 1.0)
    return ir, vi


def fusion_corpus(
    n: int, seed: int = 0, scene: SceneSpec | None = None
) -> list[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """``n`` ``(ir, vi, fused)`` triples; fused is the equal-weight blend."""
    corpus = []
    for i in range(n):
        ir, vi = source_pair(seed * 1000 + i, scene)
        corpus.append((ir, vi, 0.5 * ir + 0.5 * vi))
    return corpus


@dataclass(frozen=True)
class HotspotSpec:
    t: int = 16
    h: int = 48
    w: int = 48
    n_blobs: int = 6
    amplitude: tuple[float, float] = (0.3, 0.7)
    radius: tuple[float, float] = (1.5, 3.5)  # Gaussian sigma in px
    background: float = 0.02
    texture_amp: float = 0.02
    speed: tuple[float, float] = (0.2, 0.6)
    noise_std: float = 0.015


def hotspot_clip(seed: int, spec: HotspotSpec | None = None) -> np.ndarray:
    """Thermal-style ``(t, 1, h, w)`` clip: warm Gaussian blobs over a cold, faintly
    textured background, drifting together, with additive sensor noise."""
    sp = spec or HotspotSpec()
    rng = np.random.default_rng(seed)
    margin = 8 + int(np.ceil(sp.speed[1] * sp.t))
    big_h, big_w = sp.h + 2 * margin, sp.w + 2 * margin
    yy, xx = np.mgrid[0:big_h, 0:big_w].astype(np.float64)
    field = sp.background + sp.texture_amp * powerlaw_texture(rng, big_h, big_w, exponent=1.6)
    for _ in range(sp.n_blobs):
        cy = rng.uniform(margin, big_h - margin)
        cx = rng.uniform(margin, big_w - margin)
        sigma = rng.uniform(*sp.radius)
        amp = rng.uniform(*sp.amplitude)
        field += amp * np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2.0 * sigma**2))
    angle = rng.uniform(0.0, 2.0 * np.pi)
    speed = rng.uniform(*sp.speed)
    clip = drifting_clip(field, sp.t, sp.h, sp.w, (speed * np.cos(angle), speed * np.sin(angle)), (margin, margin))
    clip += sp.noise_std * rng.standard_normal(clip.shape)
    return np.clip(clip, 0.0, 1.0)
