"""Agreement between metric values and corruption severity.

Values arrive as a ``(n_sequences, n_levels)`` matrix. Higher-is-better
metrics are negated first, so every statistic rewards values that rise with
severity.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Literal, Sequence

import numpy as np
from scipy.stats import rankdata

from .errors import ParameterError

Direction = Literal["lower-better", "higher-better"]

CRITERIA = (
    "global_spearman",
    "global_pearson",
    "mean_seq_spearman",
    "monotonic_rate",
    "pairwise_acc",
    "adjacent_sep",
)

# floor on the pooled standard deviation in adjacent_sep
SEP_STD_FLOOR = 1e-8


@dataclass(frozen=True)
class RankStats:
    global_spearman: float
    global_pearson: float
    mean_seq_spearman: float
    monotonic_rate: float
    pairwise_acc: float
    adjacent_sep: float

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


def pearson(x, y) -> float:
    """Population Pearson correlation; 0 when either input is constant."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx <= 0 or syy <= 0:
        return 0.0
    return float(np.clip((dx @ dy) / np.sqrt(sxx * syy), -1.0, 1.0))


def spearman(x, y) -> float:
    """Pearson of average ranks (ties share their mean rank)."""
    return pearson(rankdata(x), rankdata(y))


def orient(values, direction: Direction) -> np.ndarray:
    v = np.asarray(values, dtype=np.float64)
    if direction == "higher-better":
        return -v
    if direction != "lower-better":
        raise ParameterError(f"direction must be 'lower-better' or 'higher-better', got {direction!r}")
    return v


def pairwise_accuracy(row: np.ndarray) -> float:
    i, j = np.triu_indices(row.size, k=1)
    d = row[j] - row[i]
    return float(np.mean(np.where(d > 0, 1.0, np.where(d == 0, 0.5, 0.0))))


def adjacent_separation(v: np.ndarray) -> float:
    """Mean over consecutive levels of the positive part of Cohen's d (population stds)."""
    mu = v.mean(axis=0)
    var = v.var(axis=0)
    pooled = np.sqrt(0.5 * (var[:-1] + var[1:]))
    d = np.diff(mu) / np.maximum(pooled, SEP_STD_FLOOR)
    return float(np.mean(np.maximum(d, 0.0)))


def rank_stats(values, severities: Sequence[float] | None = None, direction: Direction = "lower-better") -> RankStats:
    v = orient(values, direction)
    if v.ndim != 2:
        raise ParameterError(f"values must be a (sequences, levels) matrix, got shape {v.shape}")
    n_seq, n_lev = v.shape
    if n_lev < 2:
        raise ParameterError(f"rank statistics need at least 2 severity levels, got {n_lev}")
    if n_seq < 1:
        raise ParameterError("rank statistics need at least one sequence")
    if severities is not None and len(severities) != n_lev:
        raise ParameterError(f"{len(severities)} severity labels for {n_lev} levels")
    if not np.all(np.isfinite(v)):
        raise ParameterError("metric values contain NaN or Inf")
    level = np.tile(np.arange(n_lev, dtype=np.float64), n_seq)
    flat = v.reshape(-1)
    return RankStats(
        global_spearman=spearman(flat, level),
        global_pearson=pearson(flat, level),
        mean_seq_spearman=float(np.mean([spearman(row, np.arange(n_lev)) for row in v])),
        monotonic_rate=float(np.mean([np.all(np.diff(row) > 0) for row in v])),
        pairwise_acc=float(np.mean([pairwise_accuracy(row) for row in v])),
        adjacent_sep=adjacent_separation(v),
    )
