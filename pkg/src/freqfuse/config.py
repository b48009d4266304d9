"""Run configuration shared by the CLI subcommands.

A config file is JSON: ``{"seed": 0, "overrides": {"tc.softmax_temp": 0.1}}``.
Command-line ``--set key=value`` pairs are applied on top. Keys are
``section.field``; unknown keys are rejected.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping

from .errors import ParameterError
from .highfreq import ScamConfig
from .metrics import MmciConfig, TcpeConfig
from .tcloss import TcConfig

# section -> field -> default; the default's type drives value coercion
_PLAIN_SECTIONS: dict[str, dict[str, Any]] = {
    "freq": {"cutoff_bins": 1},
    "dfam": {"lambda_hf": 1.0, "stage": 0, "training_mode": False},
    "lfpm": {"beta": 0.5, "groups": 4, "max_shift": 1, "perturb_prob": 0.7},
}
_DATACLASS_SECTIONS = {"tc": TcConfig, "mmci": MmciConfig, "tcpe": TcpeConfig, "scam": ScamConfig}


def _known_keys() -> dict[str, Any]:
    keys: dict[str, Any] = {}
    for section, cls in _DATACLASS_SECTIONS.items():
        default = cls()
        for f in fields(cls):
            keys[f"{section}.{f.name}"] = getattr(default, f.name)
    for section, entries in _PLAIN_SECTIONS.items():
        for name, default in entries.items():
            keys[f"{section}.{name}"] = default
    return keys


KNOWN_KEYS = _known_keys()


def _coerce(key: str, value: Any, default: Any) -> Any:
    if isinstance(value, str):
        try:
            value = json.loads(value)
        except json.JSONDecodeError:
            raise ParameterError(f"override {key}: cannot parse value {value!r}") from None
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ParameterError(f"override {key}: expected true/false, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, (int, float)) or value != int(value):
            raise ParameterError(f"override {key}: expected an integer, got {value!r}")
        return int(value)
    if default is None or isinstance(default, float):
        if value is None and default is None:
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ParameterError(f"override {key}: expected a number, got {value!r}")
        return float(value)
    raise ParameterError(f"override {key}: unsupported value {value!r}")


def parse_assignment(text: str) -> tuple[str, str]:
    key, sep, value = text.partition("=")
    if not sep or not key.strip():
        raise ParameterError(f"override {text!r} must have the form section.field=value")
    return key.strip(), value.strip()


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    overrides: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        checked = {}
        for key, value in self.overrides.items():
            if key not in KNOWN_KEYS:
                raise ParameterError(f"unknown override key {key!r}; known keys: {', '.join(sorted(KNOWN_KEYS))}")
            checked[key] = _coerce(key, value, KNOWN_KEYS[key])
        object.__setattr__(self, "overrides", checked)

    @classmethod
    def load(cls, path: str | Path | None = None, assignments=(), seed: int | None = None) -> "RunConfig":
        data: dict[str, Any] = {}
        if path is not None:
            p = Path(path)
            try:
                data = json.loads(p.read_text())
            except OSError as exc:
                raise ParameterError(f"config {p}: {exc.strerror or exc}") from exc
            except json.JSONDecodeError as exc:
                raise ParameterError(f"config {p}: invalid JSON ({exc})") from exc
            if not isinstance(data, dict):
                raise ParameterError(f"config {p}: top level must be an object")
            extra = set(data) - {"seed", "overrides"}
            if extra:
                raise ParameterError(f"config {p}: unknown top-level keys {sorted(extra)}")
        overrides = dict(data.get("overrides", {}))
        for text in assignments:
            key, value = parse_assignment(text)
            overrides[key] = value
        run_seed = seed if seed is not None else data.get("seed", 0)
        if isinstance(run_seed, bool) or not isinstance(run_seed, int):
            raise ParameterError(f"seed must be an integer, got {run_seed!r}")
        return cls(seed=run_seed, overrides=overrides)

    def section(self, name: str) -> dict[str, Any]:
        prefix = name + "."
        return {k[len(prefix):]: v for k, v in self.overrides.items() if k.startswith(prefix)}

    def value(self, key: str) -> Any:
        return self.overrides.get(key, KNOWN_KEYS[key])

    def tc(self) -> TcConfig:
        return replace(TcConfig(), **self.section("tc"))

    def mmci(self) -> MmciConfig:
        return replace(MmciConfig(), **self.section("mmci"))

    def tcpe(self) -> TcpeConfig:
        return replace(TcpeConfig(), **self.section("tcpe"))

    def scam(self, stage: int) -> ScamConfig:
        return replace(ScamConfig.stage(stage), **self.section("scam"))
