"""Command-line entry point: ``freqfuse <subcommand> ...``.

Exit codes: 0 success, 1 data or numeric error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .clipio import load_clip, save_clip, save_raw
from .config import KNOWN_KEYS, RunConfig
from .dfam import DfamParams, dfam_trace
from .dumps import dump_json, sig
from .errors import FreqFuseError, ParameterError
from .freq import DecompWeights, decompose, energy_sweep
from .metrics import mmci, tcpe
from .perturb import FAMILIES, PerturbSpec, apply_logged
from .stressbench import BENCH_FAMILIES, default_metrics, emit_table, run_bench
from .synthetic import STATIC_DRIFT_SCENE, fusion_corpus, hotspot_clip
from .tcloss import tc_loss


class UsageError(Exception):
    """Bad flags or config; mapped to exit code 2."""


def _load(path: str, flag: str) -> np.ndarray:
    try:
        return np.asarray(load_clip(path), dtype=np.float64)
    except FreqFuseError as exc:
        raise type(exc)(f"{flag} {path}: {exc}") from exc


def _write_text(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    p = Path(out)
    if p.parent != Path(""):
        p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text)


def _run_config(args) -> RunConfig:
    try:
        return RunConfig.load(args.config, args.set or (), args.seed)
    except ParameterError as exc:
        raise UsageError(str(exc)) from exc


# ---------------------------------------------------------------- subcommands


def cmd_decompose(args, cfg: RunConfig) -> None:
    clip = _load(args.input, "--in")
    weights = DecompWeights(tuple(args.logits)) if args.logits else DecompWeights()
    pair = decompose(clip, weights)
    out = Path(args.out)
    save_raw(out / "low", pair.low, "low")
    save_raw(out / "high", pair.high, "high")


def cmd_dfam_forward(args, cfg: RunConfig) -> None:
    ir = _load(args.ir, "--ir")
    vi = _load(args.vi, "--vi")
    stage = args.scale_stage if args.scale_stage is not None else cfg.value("dfam.stage")
    lambda_hf = args.lambda_hf if args.lambda_hf is not None else cfg.value("dfam.lambda_hf")
    params = DfamParams.init(
        ir.shape[1],
        seed=cfg.seed,
        stage=stage,
        lambda_hf=lambda_hf,
        training_mode=cfg.value("dfam.training_mode"),
        scam_cfg=cfg.scam(stage),
        lfpm_overrides=cfg.section("lfpm"),
    )
    trace = dfam_trace(ir, vi, params, rng_seed=cfg.seed)
    save_raw(args.out, trace["out"], "fused")
    if args.dump_selection:
        sel = trace["scam"]["selection"]
        body = {
            "stage": stage,
            "grid": list(sel.grid),
            "k": sel.k,
            "scores": sel.scores,
            "selected": sel.selected,
        }
        _write_text(dump_json(body), args.dump_selection)
    if args.dump_lf:
        lf = Path(args.dump_lf)
        # (T, C) sequences are stored as (T, C, 1, 1) clips
        for mod in ("ir", "vi"):
            part = trace[f"lfpm_{mod}"]
            save_raw(lf, part["activity"][:, :, None, None], f"activity_{mod}")
            save_raw(lf, part["gate"][:, :, None, None], f"gate_{mod}")
            save_raw(lf, part["perturbed"], f"perturbed_{mod}")
            save_raw(lf, part["out"], f"lfpm_{mod}")
        save_raw(lf, trace["ltcm"]["context"][:, :, None, None], "context")
        save_raw(lf, trace["f_low"], "f_low")


def cmd_tcloss(args, cfg: RunConfig) -> None:
    fused = _load(args.fused, "--fused")
    vi = _load(args.vi, "--vi")
    ir = _load(args.ir, "--ir")
    result = tc_loss(fused, vi, ir, cfg.tc())
    if args.json:
        text = dump_json(result.to_dict())
    else:
        text = "".join(
            f"{name} {sig(getattr(result, name))}\n" for name in ("total", "l_shift", "l_align", "l_grad")
        )
    _write_text(text, args.out)


def cmd_metrics(args, cfg: RunConfig) -> None:
    fused = _load(args.fused, "--fused")
    vi = _load(args.vi, "--vi")
    ir = _load(args.ir, "--ir")
    body: dict = {}
    dump = Path(args.dump_maps) if args.dump_maps else None
    if args.which in ("mmci", "both"):
        value, parts = mmci(ir, vi, fused, cfg.mmci())
        body["mmci"] = {"value": value, "j_alpha": parts["j_alpha"], "j_r": parts["j_r"]}
        if dump:
            save_raw(dump, parts["alpha"][:, None], "mmci_alpha")
            save_raw(dump, parts["alpha_raw"][:, None], "mmci_alpha_raw")
    if args.which in ("tcpe", "both"):
        value, maps = tcpe(ir, vi, fused, cfg.tcpe())
        body["tcpe"] = {"value": value, "window_errors": maps["E"].mean(axis=(1, 2))}
        if dump:
            for name in ("E", "d_R", "d_V", "w"):
                save_raw(dump, maps[name][:, None], f"tcpe_{name}")
    _write_text(dump_json(body), args.out)


def cmd_perturb(args, cfg: RunConfig) -> None:
    clip = _load(args.input, "--in")
    sources = None
    if args.ir or args.vi:
        if not (args.ir and args.vi):
            raise UsageError("--ir and --vi must be given together")
        sources = (_load(args.ir, "--ir"), _load(args.vi, "--vi"))
    spec = PerturbSpec(args.family, args.strength, cfg.seed)
    out, log = apply_logged(clip, spec, sources)
    save_clip(args.out, out, args.format)
    if args.log:
        _write_text(dump_json(log), args.log)


def _manifest_corpus(path: str) -> list[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    p = Path(path)
    try:
        data = json.loads(p.read_text())
    except OSError as exc:
        raise ParameterError(f"--corpus {p}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParameterError(f"--corpus {p}: invalid JSON ({exc})") from exc
    entries = data.get("sequences") if isinstance(data, dict) else data
    if not isinstance(entries, list) or not entries:
        raise ParameterError(f"--corpus {p}: expected a non-empty 'sequences' list")
    corpus = []
    for i, entry in enumerate(entries):
        if isinstance(entry, str):
            entry = {k: str(Path(entry) / k) for k in ("ir", "vi", "fused")}
        if not isinstance(entry, dict) or set(entry) < {"ir", "vi", "fused"}:
            raise ParameterError(f"--corpus {p}: sequence {i} needs ir, vi and fused paths")
        clips = tuple(_load(str(p.parent / entry[k]), f"--corpus sequence {i} {k}") for k in ("ir", "vi", "fused"))
        corpus.append(clips)
    return corpus


def cmd_stressbench(args, cfg: RunConfig) -> None:
    if args.corpus:
        corpus = _manifest_corpus(args.corpus)
    else:
        corpus = fusion_corpus(args.synthetic, seed=cfg.seed, scene=STATIC_DRIFT_SCENE)
    fmt = args.format or {".json": "json", ".md": "markdown"}.get(Path(args.out or "").suffix, "csv")
    table = run_bench(
        corpus,
        families=args.family or BENCH_FAMILIES,
        metrics=default_metrics(cfg.mmci(), cfg.tcpe()),
        seed=cfg.seed,
    )
    _write_text(emit_table(table, fmt), args.out)


ENERGY_COLUMNS = ("perturbation", "strength", "E_L", "E_H", "R_L", "eta_L", "eta_H")
DEFAULT_SWEEPS = {
    "flicker": (0.0, 0.5, 1.0, 1.5, 2.0),
    "jitter": (0.0, 0.5, 1.0, 1.5, 2.0),
    "local_misalignment": (0.0, 1.0, 2.0, 3.0, 4.0),
}


def cmd_freq_analysis(args, cfg: RunConfig) -> None:
    if args.ir:
        clips = [(_load(args.ir, "--ir"), _load(args.vi, "--vi") if args.vi else None)]
    else:
        if args.vi:
            raise UsageError("--vi needs --ir")
        clips = [(hotspot_clip(cfg.seed * 1000 + i), None) for i in range(args.synthetic)]
    families = args.family or list(DEFAULT_SWEEPS)
    cutoff = args.cutoff_bins if args.cutoff_bins is not None else cfg.value("freq.cutoff_bins")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(ENERGY_COLUMNS)
    for fam in families:
        strengths = args.strengths or DEFAULT_SWEEPS.get(fam, DEFAULT_SWEEPS["flicker"])
        reports = [
            energy_sweep(ir, vi, PerturbSpec(fam, 0.0, cfg.seed + i), strengths, cutoff)
            for i, (ir, vi) in enumerate(clips)
        ]
        # one row per strength, averaged over clips
        for j, s in enumerate(strengths):
            rows = [r[j].as_row() for r in reports]
            nums = [np.mean([row[c] for row in rows]) for c in ENERGY_COLUMNS[2:]]
            writer.writerow([fam, sig(s)] + [sig(x) for x in nums])
    _write_text(buf.getvalue(), args.out)


# ---------------------------------------------------------------- parser


def _strength_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE", help="JSON run config with 'seed' and 'overrides'")
    common.add_argument(
        "--set",
        action="append",
        metavar="KEY=VALUE",
        help="dotted override, repeatable (e.g. tc.softmax_temp=0.1); known keys: " + ", ".join(sorted(KNOWN_KEYS)),
    )
    common.add_argument("--seed", type=int, help="random seed (overrides the config file)")

    parser = argparse.ArgumentParser(prog="freqfuse", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("decompose", parents=[common], help="split a clip into low/high spatial bands")
    p.add_argument("--in", dest="input", required=True, metavar="CLIP")
    p.add_argument("--out", required=True, metavar="DIR", help="writes DIR/low and DIR/high raw dumps")
    p.add_argument("--logits", type=float, nargs=3, metavar=("A3", "A5", "A7"), help="scale logits (default 0 0 0)")
    p.set_defaults(func=cmd_decompose, subparser=p)

    p = sub.add_parser("dfam-forward", parents=[common], help="run the dual-branch fusion block with seeded weights")
    p.add_argument("--ir", required=True, metavar="CLIP")
    p.add_argument("--vi", required=True, metavar="CLIP")
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--scale-stage", type=int, choices=(0, 1, 2), help="sparse-attention preset (default 0)")
    p.add_argument("--lambda-hf", type=float, help="high-frequency branch weight (default 1.0)")
    p.add_argument("--dump-selection", metavar="FILE", help="write block scores and selected indices as JSON")
    p.add_argument("--dump-lf", metavar="DIR", help="write low-frequency branch outputs as raw dumps")
    p.set_defaults(func=cmd_dfam_forward, subparser=p)

    p = sub.add_parser("tcloss", parents=[common], help="temporal consistency loss of a fused clip")
    p.add_argument("--fused", required=True, metavar="CLIP")
    p.add_argument("--vi", required=True, metavar="CLIP")
    p.add_argument("--ir", required=True, metavar="CLIP")
    p.add_argument("--json", action="store_true", help="emit the full breakdown as JSON")
    p.add_argument("--out", metavar="FILE", help="output file (default stdout)")
    p.set_defaults(func=cmd_tcloss, subparser=p)

    p = sub.add_parser("metrics", parents=[common], help="MMCI and TCPE of a fused clip")
    p.add_argument("--fused", required=True, metavar="CLIP")
    p.add_argument("--vi", required=True, metavar="CLIP")
    p.add_argument("--ir", required=True, metavar="CLIP")
    p.add_argument("--which", choices=("mmci", "tcpe", "both"), default="both")
    p.add_argument("--dump-maps", metavar="DIR", help="write per-pixel maps as raw dumps")
    p.add_argument("--out", metavar="FILE", help="output JSON file (default stdout)")
    p.set_defaults(func=cmd_metrics, subparser=p)

    p = sub.add_parser("perturb", parents=[common], help="apply a seeded corruption to a clip")
    p.add_argument("--in", dest="input", required=True, metavar="CLIP")
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--family", required=True, choices=FAMILIES)
    p.add_argument("--strength", required=True, type=float)
    p.add_argument("--ir", metavar="CLIP", help="infrared source (modality_drift)")
    p.add_argument("--vi", metavar="CLIP", help="visible source (modality_drift)")
    p.add_argument("--format", choices=("raw-f32", "png-sequence"), default="raw-f32")
    p.add_argument("--log", metavar="FILE", help="write drawn gains/shifts/orders as JSON")
    p.set_defaults(func=cmd_perturb, subparser=p)

    p = sub.add_parser("stressbench", parents=[common], help="rank metrics by agreement with corruption severity")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--corpus", metavar="MANIFEST", help="JSON manifest listing (ir, vi, fused) clip triples")
    src.add_argument("--synthetic", type=int, metavar="N", help="use N seeded synthetic sequences")
    p.add_argument("--out", metavar="FILE", help="output table (default stdout)")
    p.add_argument("--format", choices=("csv", "json", "markdown"), help="default: from --out suffix, else csv")
    p.add_argument("--family", action="append", choices=FAMILIES, help="corruption family, repeatable")
    p.set_defaults(func=cmd_stressbench, subparser=p)

    p = sub.add_parser("freq-analysis", parents=[common], help="temporal energy of low/high bands under corruption")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--ir", metavar="CLIP", help="clip to analyse")
    src.add_argument("--synthetic", type=int, metavar="N", help="average over N seeded synthetic clips")
    p.add_argument("--vi", metavar="CLIP", help="second modality, analysed as extra channels")
    p.add_argument("--family", action="append", choices=FAMILIES, help="corruption family, repeatable")
    p.add_argument("--strengths", type=_strength_list, metavar="S0,S1,...", help="must start at 0")
    p.add_argument("--cutoff-bins", type=int, help="temporal DFT bins counted as low band (default 1)")
    p.add_argument("--out", metavar="FILE", help="output CSV (default stdout)")
    p.set_defaults(func=cmd_freq_analysis, subparser=p)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _run_config(args)
        args.func(args, cfg)
    except UsageError as exc:
        args.subparser.print_usage(sys.stderr)
        print(f"freqfuse {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (FreqFuseError, OSError) as exc:
        print(f"freqfuse {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
