"""Multi-scale box-filter frequency decomposition and temporal energy analysis."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy import ndimage

from .errors import DimensionError, InsufficientFramesError, ParameterError
from .video import as_clip_array

SCALES = (3, 5, 7)


@dataclass(frozen=True)
class DecompWeights:
    """Per-scale logits ``a_k`` and their softmax weights for kernel sizes 3, 5, 7."""

    logits: tuple[float, ...] = (0.0, 0.0, 0.0)
    scales: tuple[int, ...] = SCALES

    def __post_init__(self) -> None:
        if len(self.logits) != len(self.scales):
            raise ParameterError(
                f"need one logit per scale {self.scales}, got {len(self.logits)}"
            )
        if any(k % 2 == 0 or k < 1 for k in self.scales):
            raise ParameterError(f"smoothing scales must be odd and positive, got {self.scales}")

    @property
    def weights(self) -> np.ndarray:
        a = np.asarray(self.logits, dtype=np.float64)
        e = np.exp(a - a.max())
        return e / e.sum()


@dataclass(frozen=True)
class FreqPair:
    low: np.ndarray
    high: np.ndarray


@dataclass(frozen=True)
class EnergyReport:
    e_low: float
    e_high: float
    r_low: float
    eta_low: float
    eta_high: float
    cutoff_bins: int
    strength: float = 0.0
    perturbation: str = "none"

    def as_row(self) -> dict:
        return {
            "perturbation": self.perturbation,
            "strength": self.strength,
            "E_L": self.e_low,
            "E_H": self.e_high,
            "R_L": self.r_low,
            "eta_L": self.eta_low,
            "eta_H": self.eta_high,
        }


def box_smooth(x: np.ndarray, k: int) -> np.ndarray:
    """Stride-1 ``k x k`` average pool after mirror padding (edge pixel not repeated)."""
    w = np.full(k, 1.0 / k)
    out = ndimage.correlate1d(x, w, axis=-1, mode="mirror")
    return ndimage.correlate1d(out, w, axis=-2, mode="mirror")


def decompose(features, weights: DecompWeights | None = None) -> FreqPair:
    """Split ``(T, C, H, W)`` features into low = weighted box smoothings and high = residual."""
    weights = weights or DecompWeights()
    f = as_clip_array(features, "features")
    kmax = max(weights.scales)
    if f.shape[2] < kmax or f.shape[3] < kmax:
        raise DimensionError(
            f"decompose needs H, W >= {kmax}, got H={f.shape[2]}, W={f.shape[3]}"
        )
    low = np.zeros_like(f)
    for alpha, k in zip(weights.weights, weights.scales):
        low += alpha * box_smooth(f, k)
    return FreqPair(low=low, high=f - low)


def _variation_energy(x: np.ndarray) -> float:
    d = np.diff(x, axis=0)
    # mean over elements, then over the T-1 frame pairs
    return float(np.mean(np.mean(d.reshape(d.shape[0], -1) ** 2, axis=1)))


def low_band_ratio(x: np.ndarray, cutoff_bins: int) -> float:
    """Fraction of temporal-DFT energy in DC plus the ``cutoff_bins`` lowest frequencies.

    Computed per element along axis 0 and averaged; elements with zero
    spectral energy count as fully low-band.
    """
    t = x.shape[0]
    spec = np.abs(np.fft.fft(x, axis=0)) ** 2
    k = np.arange(t)
    freq_index = np.minimum(k, t - k)
    low_mask = freq_index <= cutoff_bins
    total = spec.sum(axis=0)
    low = spec[low_mask].sum(axis=0)
    tiny = total <= 1e-300
    ratio = np.where(tiny, 1.0, low / np.where(tiny, 1.0, total))
    return float(np.mean(ratio))


def temporal_energy(pair: FreqPair, cutoff_bins: int = 1) -> EnergyReport:
    low = np.asarray(pair.low, dtype=np.float64)
    high = np.asarray(pair.high, dtype=np.float64)
    t = low.shape[0]
    if t < 2:
        raise InsufficientFramesError(f"temporal_energy needs T >= 2, got T={t}")
    if not 1 <= cutoff_bins <= -(-t // 2):
        raise ParameterError(f"cutoff_bins must lie in [1, ceil(T/2)={-(-t // 2)}], got {cutoff_bins}")
    e_l = _variation_energy(low)
    e_h = _variation_energy(high)
    total = e_l + e_h
    r_l = e_l / total if total > 0 else 0.0
    return EnergyReport(
        e_low=e_l,
        e_high=e_h,
        r_low=r_l,
        eta_low=low_band_ratio(low, cutoff_bins),
        eta_high=low_band_ratio(high, cutoff_bins),
        cutoff_bins=cutoff_bins,
    )


def energy_sweep(
    ir,
    vi,
    perturb_spec,
    strengths: Sequence[float],
    cutoff_bins: int = 1,
) -> list[EnergyReport]:
    """Perturb at each strength, decompose with uniform weights, report temporal energies.

    When ``vi`` is given, both modalities are perturbed with the same spec
    and analysed jointly as extra channels of one feature tensor.
    """
    from .perturb import apply

    strengths = list(strengths)
    if not strengths or strengths[0] != 0:
        raise ParameterError(f"strengths must be non-empty and start at 0, got {strengths}")
    sources = [as_clip_array(ir, "ir")]
    if vi is not None:
        sources.append(as_clip_array(vi, "vi"))
    reports = []
    for s in strengths:
        spec = replace(perturb_spec, strength=float(s))
        perturbed = [np.asarray(apply(x, spec), dtype=np.float64) for x in sources]
        feats = np.concatenate(perturbed, axis=1)
        rep = temporal_energy(decompose(feats), cutoff_bins)
        reports.append(replace(rep, strength=float(s), perturbation=perturb_spec.family))
    return reports
