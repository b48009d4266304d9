"""Clip I/O: PNG frame directories and raw little-endian float32 dumps.

A raw dump is a ``<name>.f32`` payload in row-major ``T, C, H, W`` order next
to a ``<name>.json`` sidecar holding ``{"t", "c", "h", "w"}``.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Literal

import numpy as np
from PIL import Image

from .errors import ClipIOError, DimensionError, FormatError
from .video import VideoClip

PNG_SUFFIXES = (".png",)
RAW_SUFFIX = ".f32"

ClipFormat = Literal["png-sequence", "raw-f32"]


def detect_format(path: Path) -> ClipFormat:
    if path.is_file():
        if path.suffix == RAW_SUFFIX:
            return "raw-f32"
        raise FormatError(f"{path}: cannot infer clip format from suffix {path.suffix!r}")
    if path.is_dir():
        if list(path.glob(f"*{RAW_SUFFIX}")):
            return "raw-f32"
        return "png-sequence"
    raise ClipIOError(f"{path}: no such file or directory")


def _raw_payload_path(path: Path) -> Path:
    if path.is_dir():
        found = sorted(path.glob(f"*{RAW_SUFFIX}"))
        if len(found) != 1:
            raise FormatError(f"{path}: expected exactly one {RAW_SUFFIX} file, found {len(found)}")
        return found[0]
    return path


def _read_png(path: Path) -> np.ndarray:
    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            if mode in ("I;16", "I;16B", "I;16L"):
                return np.asarray(im, dtype=np.float32)[None] / np.float32(65535.0)
            if mode == "LA" or mode == "1":
                im = im.convert("L")
            elif mode != "L" and mode != "RGB":
                im = im.convert("RGB")
            arr = np.asarray(im, dtype=np.float32) / np.float32(255.0)
    except OSError as exc:
        raise ClipIOError(f"{path}: unreadable image ({exc})") from exc
    if arr.ndim == 2:
        return arr[None]
    return np.moveaxis(arr, -1, 0)


def load_clip(path, fmt: ClipFormat | None = None) -> VideoClip:
    """Load a clip from a PNG directory or a raw-f32 dump; 8-bit data is scaled by 1/255."""
    path = Path(path)
    if not path.exists():
        raise ClipIOError(f"{path}: no such file or directory")
    fmt = fmt or detect_format(path)
    if fmt == "raw-f32":
        return _load_raw(_raw_payload_path(path))
    if fmt != "png-sequence":
        raise FormatError(f"unknown clip format {fmt!r}")
    if not path.is_dir():
        raise ClipIOError(f"{path}: png-sequence input must be a directory")
    files = sorted(p for p in path.iterdir() if p.suffix.lower() in PNG_SUFFIXES)
    if not files:
        raise ClipIOError(f"{path}: no PNG frames found")
    frames = []
    for f in files:
        arr = _read_png(f)
        if frames and arr.shape != frames[0].shape:
            raise DimensionError(
                f"{f}: frame shape {arr.shape} does not match first frame {frames[0].shape}"
            )
        frames.append(arr)
    return VideoClip(np.stack(frames))


def _load_raw(payload: Path) -> VideoClip:
    return VideoClip(read_raw(payload))


def read_raw(payload) -> np.ndarray:
    """Raw dump as a float32 array of any channel count (feature maps, score maps)."""
    payload = Path(payload)
    sidecar = payload.with_suffix(".json")
    try:
        meta = json.loads(sidecar.read_text())
        raw = payload.read_bytes()
    except OSError as exc:
        raise ClipIOError(f"{payload}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"{sidecar}: invalid JSON ({exc})") from exc
    try:
        shape = tuple(int(meta[k]) for k in ("t", "c", "h", "w"))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{sidecar}: sidecar must declare integer t, c, h, w") from exc
    expected = int(np.prod(shape)) * 4
    if len(raw) != expected:
        raise FormatError(
            f"{payload}: sidecar declares shape {shape} ({expected} bytes) but payload holds {len(raw)} bytes"
        )
    return np.frombuffer(raw, dtype="<f4").reshape(shape)


def save_raw(path, array, name: str = "clip") -> Path:
    """Write ``array`` (``T, C, H, W``) as ``<path>/<name>.f32`` plus sidecar; returns the payload path."""
    arr = np.asarray(array, dtype="<f4")
    if arr.ndim != 4:
        raise DimensionError(f"raw dumps hold 4-D arrays, got shape {arr.shape}")
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    payload = out / f"{name}{RAW_SUFFIX}"
    payload.write_bytes(np.ascontiguousarray(arr).tobytes())
    t, c, h, w = arr.shape
    payload.with_suffix(".json").write_text(json.dumps({"t": t, "c": c, "h": h, "w": w}) + "\n")
    return payload


def save_png_sequence(path, array) -> None:
    """Quantize to 8 bits (values clipped to [0, 1]) and write ``frame_00000.png`` ..."""
    arr = np.asarray(array, dtype=np.float64)
    if arr.ndim != 4 or arr.shape[1] not in (1, 3):
        raise DimensionError(f"PNG output needs (T, 1|3, H, W), got shape {arr.shape}")
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    q = np.round(np.clip(arr, 0.0, 1.0) * 255.0).astype(np.uint8)
    for t, frame in enumerate(q):
        img = frame[0] if frame.shape[0] == 1 else np.moveaxis(frame, 0, -1)
        Image.fromarray(img).save(out / f"frame_{t:05d}.png")


def save_clip(path, array, fmt: ClipFormat = "raw-f32") -> None:
    if fmt == "raw-f32":
        save_raw(path, array)
    elif fmt == "png-sequence":
        save_png_sequence(path, array)
    else:
        raise FormatError(f"unknown clip format {fmt!r}")
