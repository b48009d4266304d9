"""Metric stress benchmark: corrupt fused clips at increasing severity, score every
registered metric, and rank the metrics by how faithfully they track severity."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.stats import rankdata

from .dumps import SCHEMA_VERSION, dump_json, sig
from .errors import NumericError, ParameterError
from .metrics import MmciConfig, TcpeConfig, mmci, tcpe
from .perturb import SEVERITY_LEVELS, PerturbSpec, apply
from .rankstats import CRITERIA, Direction, RankStats, rank_stats

BENCH_FAMILIES = ("mixed_hard", "modality_drift", "temporal_shuffle")


@dataclass(frozen=True)
class Metric:
    """A scorer ``fn(ir, vi, fused, family=..., sequence=..., level=...) -> float``."""

    name: str
    fn: Callable[..., float]
    direction: Direction = "lower-better"

    def score(self, ir, vi, fused, *, family: str, sequence: int, level: int) -> float:
        return float(self.fn(ir, vi, fused, family=family, sequence=sequence, level=level))


def default_metrics(mmci_cfg: MmciConfig | None = None, tcpe_cfg: TcpeConfig | None = None) -> list[Metric]:
    return [
        Metric("MMCI", lambda ir, vi, f, **_: mmci(ir, vi, f, mmci_cfg)[0], "lower-better"),
        Metric("TCPE", lambda ir, vi, f, **_: tcpe(ir, vi, f, tcpe_cfg)[0], "lower-better"),
    ]


def external_metric(
    name: str, scores: Mapping[tuple[str, int, int], float], direction: Direction
) -> Metric:
    """Rank scores computed elsewhere, keyed by ``(family, sequence, level_index)``."""

    def lookup(ir, vi, fused, *, family, sequence, level):
        try:
            return scores[(family, sequence, level)]
        except KeyError:
            raise ParameterError(f"external metric {name!r} has no score for {(family, sequence, level)}") from None

    return Metric(name, lookup, direction)


@dataclass(frozen=True)
class BenchRow:
    family: str
    metric: str
    stats: RankStats
    avg_rank: float


@dataclass
class BenchTable:
    rows: list[BenchRow] = field(default_factory=list)
    # family -> criterion -> metric -> rank
    ranks: dict[str, dict[str, dict[str, float]]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "rows": [
                {"mode": r.family, "metric": r.metric, **r.stats.as_dict(), "avg_rank": r.avg_rank}
                for r in self.rows
            ],
            "ranks": self.ranks,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BenchTable":
        rows = [
            BenchRow(
                family=r["mode"],
                metric=r["metric"],
                stats=RankStats(**{c: float(r[c]) for c in CRITERIA}),
                avg_rank=float(r["avg_rank"]),
            )
            for r in data.get("rows", [])
        ]
        return cls(rows=rows, ranks=data.get("ranks", {}))

    def row(self, family: str, metric: str) -> BenchRow:
        for r in self.rows:
            if r.family == family and r.metric == metric:
                return r
        raise KeyError((family, metric))


def _sequence_seed(seed: int, family_index: int, sequence: int) -> int:
    return int(np.random.SeedSequence([seed, family_index, sequence]).generate_state(1)[0])


def score_matrix(
    corpus: Sequence[tuple],
    family: str,
    family_index: int,
    levels: Sequence[float],
    metrics: Sequence[Metric],
    seed: int,
) -> dict[str, np.ndarray]:
    """Metric values ``(n_sequences, n_levels)`` for one corruption family.

    The perturbation seed depends on the sequence only, so all levels of a
    sequence share their random draws and differ in strength alone.
    """
    out = {m.name: np.empty((len(corpus), len(levels))) for m in metrics}
    for s, (ir, vi, fused) in enumerate(corpus):
        sseed = _sequence_seed(seed, family_index, s)
        for li, strength in enumerate(levels):
            spec = PerturbSpec(family, float(strength), sseed)
            corrupted = apply(fused, spec, sources=(ir, vi))
            for m in metrics:
                v = m.score(ir, vi, corrupted, family=family, sequence=s, level=li)
                if not np.isfinite(v):
                    raise NumericError(
                        f"metric {m.name!r} returned {v} for family={family}, sequence={s}, level={li}"
                    )
                out[m.name][s, li] = v
    return out


def run_bench(
    corpus: Sequence[tuple],
    families: Sequence[str] = BENCH_FAMILIES,
    levels: Sequence[float] = SEVERITY_LEVELS,
    metrics: Sequence[Metric] | None = None,
    seed: int = 0,
) -> BenchTable:
    if not corpus:
        raise ParameterError("stress bench needs a non-empty corpus")
    if len(levels) < 2:
        raise ParameterError(f"stress bench needs at least 2 levels, got {len(levels)}")
    metrics = list(metrics) if metrics is not None else default_metrics()
    names = [m.name for m in metrics]
    if len(set(names)) != len(names):
        raise ParameterError(f"metric names must be unique, got {names}")
    table = BenchTable()
    for fi, family in enumerate(families):
        values = score_matrix(corpus, family, fi, levels, metrics, seed)
        stats = {m.name: rank_stats(values[m.name], levels, m.direction) for m in metrics}
        fam_ranks: dict[str, dict[str, float]] = {}
        for crit in CRITERIA:
            col = np.array([getattr(stats[n], crit) for n in names])
            r = rankdata(-col, method="average")
            fam_ranks[crit] = {n: float(x) for n, x in zip(names, r)}
        table.ranks[family] = fam_ranks
        avg = {n: float(np.mean([fam_ranks[c][n] for c in CRITERIA])) for n in names}
        order = sorted(range(len(names)), key=lambda i: (avg[names[i]], i))
        for i in order:
            table.rows.append(BenchRow(family, names[i], stats[names[i]], avg[names[i]]))
    return table


HEADER = ("mode", "metric") + CRITERIA + ("avg_rank",)


def _numbers(row: BenchRow) -> list[float]:
    return [getattr(row.stats, c) for c in CRITERIA] + [row.avg_rank]


def emit_table(table: BenchTable, fmt: str = "csv") -> str:
    """CSV and JSON carry 9 significant digits; markdown is rounded to 4 decimals for reading."""
    if fmt == "json":
        body = table.to_dict()
        body.pop("schema")
        return dump_json(body)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(HEADER)
        for r in table.rows:
            writer.writerow([r.family, r.metric] + [sig(x) for x in _numbers(r)])
        return buf.getvalue()
    if fmt == "markdown":
        lines = ["| " + " | ".join(HEADER) + " |", "|" + "---|" * len(HEADER)]
        for r in table.rows:
            cells = [r.family, r.metric] + [f"{x:.4f}" for x in _numbers(r)]
            lines.append("| " + " | ".join(cells) + " |")
        return "\n".join(lines) + "\n"
    raise ParameterError(f"unknown table format {fmt!r}; choose csv, json or markdown")


def parse_json_table(text: str) -> BenchTable:
    return BenchTable.from_dict(json.loads(text))
