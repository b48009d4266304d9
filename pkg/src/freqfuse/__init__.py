"""Frequency-aware infrared/visible video fusion toolkit.

Forward-only fusion kernels (band decomposition, low-frequency temporal
perturbation and context gating, sparse cross-modal block attention), an
offset-aware temporal consistency loss, the MMCI and TCPE temporal metrics,
seeded corruption generators and a metric stress benchmark.
"""

from .clipio import load_clip, read_raw, save_clip, save_raw
from .dfam import DfamParams, dfam_forward, dfam_trace
from .errors import (
    ClipIOError,
    DimensionError,
    FormatError,
    FreqFuseError,
    InsufficientFramesError,
    MissingInputError,
    NumericError,
    ParameterError,
    UnsupportedChannelsError,
)
from .freq import DecompWeights, EnergyReport, FreqPair, decompose, energy_sweep, temporal_energy
from .highfreq import ScamConfig, ScamParams, scam_forward, scam_trace
from .lowfreq import LfpmParams, LtcmParams, lfpm_forward, ltcm_fuse
from .metrics import MmciConfig, TcpeConfig, mmci, tcpe
from .perturb import PerturbSpec, apply, apply_logged
from .rankstats import RankStats, rank_stats
from .stressbench import BenchTable, Metric, emit_table, run_bench
from .tcloss import OffsetEstimate, TcBreakdown, TcConfig, estimate_shift, tc_loss
from .video import VideoClip

__version__ = "0.1.0"

__all__ = [
    "BenchTable",
    "ClipIOError",
    "DecompWeights",
    "DfamParams",
    "DimensionError",
    "EnergyReport",
    "FormatError",
    "FreqFuseError",
    "FreqPair",
    "InsufficientFramesError",
    "LfpmParams",
    "LtcmParams",
    "Metric",
    "MissingInputError",
    "MmciConfig",
    "NumericError",
    "OffsetEstimate",
    "ParameterError",
    "PerturbSpec",
    "RankStats",
    "ScamConfig",
    "ScamParams",
    "TcBreakdown",
    "TcConfig",
    "TcpeConfig",
    "UnsupportedChannelsError",
    "VideoClip",
    "apply",
    "apply_logged",
    "decompose",
    "dfam_forward",
    "dfam_trace",
    "emit_table",
    "energy_sweep",
    "estimate_shift",
    "lfpm_forward",
    "load_clip",
    "ltcm_fuse",
    "mmci",
    "rank_stats",
    "read_raw",
    "run_bench",
    "save_clip",
    "save_raw",
    "scam_forward",
    "scam_trace",
    "tc_loss",
    "tcpe",
    "temporal_energy",
]
