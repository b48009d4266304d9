"""Dual-branch frequency-aware fusion block (forward only)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .freq import DecompWeights, decompose
from .highfreq import ScamConfig, ScamParams, scam_trace
from .lowfreq import LfpmParams, LtcmParams, lfpm_trace, ltcm_trace
from .nn import Linear, pointwise
from .video import as_clip_array, check_same_shape


@dataclass(frozen=True)
class DfamParams:
    decomp: DecompWeights
    lfpm_ir: LfpmParams
    lfpm_vi: LfpmParams
    ltcm: LtcmParams
    scam_cfg: ScamConfig
    scam: ScamParams
    mix: Linear  # 2C -> C
    lambda_hf: float = 1.0

    @classmethod
    def init(
        cls,
        channels: int,
        seed: int = 0,
        stage: int = 0,
        lambda_hf: float = 1.0,
        training_mode: bool = False,
        scam_cfg: ScamConfig | None = None,
        lfpm_overrides: dict | None = None,
    ) -> "DfamParams":
        """Seeded parameters; ``scam_cfg`` replaces the stage preset when given."""
        seeds = np.random.SeedSequence(seed).generate_state(5)
        cfg = scam_cfg or ScamConfig.stage(stage)
        lf = dict(lfpm_overrides or {}, training_mode=training_mode)
        return cls(
            decomp=DecompWeights(),
            lfpm_ir=LfpmParams.init(channels, int(seeds[0]), **lf),
            lfpm_vi=LfpmParams.init(channels, int(seeds[1]), **lf),
            ltcm=LtcmParams.init(channels, int(seeds[2])),
            scam_cfg=cfg,
            scam=ScamParams.init(channels, cfg, int(seeds[3])),
            mix=Linear.init(2 * channels, channels, np.random.default_rng(seeds[4])),
            lambda_hf=lambda_hf,
        )


def dfam_trace(f_ir, f_vi, params: DfamParams, rng_seed: int = 0) -> dict:
    """Full forward pass keeping the intermediates of both branches."""
    ir = as_clip_array(f_ir, "f_ir")
    vi = as_clip_array(f_vi, "f_vi")
    check_same_shape(f_ir=ir, f_vi=vi)
    dec_ir = decompose(ir, params.decomp)
    dec_vi = decompose(vi, params.decomp)
    lf_ir = lfpm_trace(dec_ir.low, params.lfpm_ir, rng_seed)
    lf_vi = lfpm_trace(dec_vi.low, params.lfpm_vi, rng_seed + 1)
    lt = ltcm_trace(lf_ir["out"], lf_vi["out"], params.ltcm)
    hf = scam_trace(dec_ir.high, dec_vi.high, params.scam_cfg, params.scam)
    concat = np.concatenate([lt["out"], params.lambda_hf * hf["out"]], axis=1)
    return {
        "low_ir": dec_ir.low,
        "low_vi": dec_vi.low,
        "high_ir": dec_ir.high,
        "high_vi": dec_vi.high,
        "lfpm_ir": lf_ir,
        "lfpm_vi": lf_vi,
        "ltcm": lt,
        "scam": hf,
        "f_low": lt["out"],
        "f_high": hf["out"],
        "concat": concat,
        "out": pointwise(concat, params.mix),
    }


def dfam_forward(f_ir, f_vi, params: DfamParams, rng_seed: int = 0) -> np.ndarray:
    return dfam_trace(f_ir, f_vi, params, rng_seed)["out"]
