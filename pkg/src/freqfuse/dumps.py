"""Deterministic numeric serialization: 9 significant digits in JSON and CSV."""

from __future__ import annotations

import json
from typing import Any

import numpy as np

SCHEMA_VERSION = 1
SIG_DIGITS = 9


def sig(x: float) -> str:
    return f"{float(x):.{SIG_DIGITS}g}"


def jsonable(obj: Any) -> Any:
    """Recursively convert numpy values and round floats to 9 significant digits."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not np.isfinite(v):
            return None
        return float(sig(v))
    return obj


def dump_json(obj: dict) -> str:
    """``{"schema": 1, ...}`` as indented JSON with a trailing newline."""
    return json.dumps({"schema": SCHEMA_VERSION, **jsonable(obj)}, indent=2) + "\n"
