"""Sparse cross-modal attention over the most salient spatio-temporal blocks.

Pipeline: joint importance map -> per-block scores -> top-K selection ->
bidirectional attention between the modalities' block tokens -> gated
residual + feed-forward -> write-back -> local 3-D branch -> gated fusion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError
from .nn import GatedFuse, Linear, LocalBlock, relu, sigmoid, softmax, uniform
from .video import as_clip_array, check_same_shape

STAGE_RATIOS = (0.10, 0.20, 0.30)
STAGE_HEADS = (2, 2, 2)


def make_divisible(value: float, divisor: int) -> int:
    """Nearest multiple of ``divisor`` (ties round up), never below ``divisor``."""
    q = math.floor(value / divisor + 0.5)
    return max(divisor, int(q) * divisor)


@dataclass(frozen=True)
class ScamConfig:
    block_size: int = 8
    stride: int = 8
    sparse_ratio: float = 0.10
    heads: int = 2
    expansion: float = 0.75

    def __post_init__(self) -> None:
        if self.block_size < 1:
            raise ParameterError(f"block_size must be >= 1, got {self.block_size}")
        if self.stride != self.block_size:
            raise ParameterError("only non-overlapping blocks are supported (stride == block_size)")
        if not 0.0 < self.sparse_ratio <= 1.0:
            raise ParameterError(f"sparse_ratio must lie in (0, 1], got {self.sparse_ratio}")
        if self.heads < 1:
            raise ParameterError(f"heads must be >= 1, got {self.heads}")

    @classmethod
    def stage(cls, index: int, **overrides) -> "ScamConfig":
        if index not in (0, 1, 2):
            raise ParameterError(f"scale stage must be 0, 1 or 2, got {index}")
        return cls(sparse_ratio=STAGE_RATIOS[index], heads=STAGE_HEADS[index], **overrides)

    def attn_dim(self, channels: int) -> int:
        return make_divisible(max(math.floor(self.expansion * channels), self.heads), self.heads)

    def ffn_hidden(self, channels: int) -> int:
        return math.ceil(self.expansion * self.attn_dim(channels))

    def num_selected(self, n_blocks: int) -> int:
        # round before flooring so 0.3 * 10 does not become 2
        return max(1, math.floor(round(self.sparse_ratio * n_blocks, 9)))


@dataclass(frozen=True)
class BlockSelection:
    scores: np.ndarray  # (N_b,) row-major over the block grid
    selected: np.ndarray  # (K,) block indices, descending score then ascending index
    k: int
    grid: tuple[int, int]


def pad_to_blocks(x: np.ndarray, p: int) -> np.ndarray:
    h, w = x.shape[-2:]
    ph, pw = (-h) % p, (-w) % p
    if ph == 0 and pw == 0:
        return x
    pad = [(0, 0)] * (x.ndim - 2) + [(0, ph), (0, pw)]
    return np.pad(x, pad)


def importance_map(h_ir, h_vi) -> np.ndarray:
    """Joint saliency ``(T, C, H, W)``; the previous frame of frame 0 is itself."""
    ir = as_clip_array(h_ir, "h_ir")
    vi = as_clip_array(h_vi, "h_vi")
    check_same_shape(h_ir=ir, h_vi=vi)
    ir_prev = np.concatenate([ir[:1], ir[:-1]], axis=0)
    vi_prev = np.concatenate([vi[:1], vi[:-1]], axis=0)
    return (
        np.abs(ir - ir_prev)
        + np.abs(vi - vi_prev)
        + 0.5 * (np.abs(ir) + np.abs(vi))
        + np.abs(ir - vi)
    )


def rank_blocks(scores: np.ndarray, k: int) -> np.ndarray:
    order = np.lexsort((np.arange(scores.size), -scores))
    return order[:k]


def importance_scores(h_ir, h_vi, cfg: ScamConfig) -> BlockSelection:
    s = importance_map(h_ir, h_vi).mean(axis=1)  # channel mean -> (T, H, W)
    p = cfg.block_size
    s = pad_to_blocks(s, p)
    t, hp, wp = s.shape
    nby, nbx = hp // p, wp // p
    blocks = s.reshape(t, nby, p, nbx, p).mean(axis=(0, 2, 4)).reshape(-1)
    k = cfg.num_selected(blocks.size)
    return BlockSelection(scores=blocks, selected=rank_blocks(blocks, k), k=k, grid=(nby, nbx))


@dataclass(frozen=True)
class TokenSet:
    tokens: np.ndarray  # (K, T*p*p, C)
    positions: np.ndarray  # (K, T*p*p, 3): (t, cx, cy) in [0, 1]


def block_origin(index: int, grid: tuple[int, int], p: int) -> tuple[int, int]:
    by, bx = divmod(int(index), grid[1])
    return by * p, bx * p


def gather_tokens(x: np.ndarray, selection: BlockSelection, p: int) -> TokenSet:
    """Flatten each selected block over ``(t, y, x)`` into ``T * p * p`` tokens of width C."""
    xp = pad_to_blocks(x, p)
    t, c, hp, wp = xp.shape
    toks, pos = [], []
    frame_pos = np.arange(t) / (t - 1) if t > 1 else np.zeros(1)
    for b in selection.selected:
        y0, x0 = block_origin(b, selection.grid, p)
        blk = xp[:, :, y0 : y0 + p, x0 : x0 + p]  # (T, C, p, p)
        toks.append(blk.transpose(0, 2, 3, 1).reshape(t * p * p, c))
        cx, cy = (x0 + p / 2) / wp, (y0 + p / 2) / hp
        tpos = np.repeat(frame_pos, p * p)
        pos.append(np.stack([tpos, np.full_like(tpos, cx), np.full_like(tpos, cy)], axis=1))
    if not toks:
        return TokenSet(np.zeros((0, t * p * p, c)), np.zeros((0, t * p * p, 3)))
    return TokenSet(np.stack(toks), np.stack(pos))


def scatter_tokens(x: np.ndarray, tokens: np.ndarray, selection: BlockSelection, p: int) -> np.ndarray:
    """Write block tokens back into a copy of ``x``; other positions are untouched."""
    h, w = x.shape[-2:]
    out = pad_to_blocks(x, p).copy()
    t, c = out.shape[:2]
    for blk_tokens, b in zip(tokens, selection.selected):
        y0, x0 = block_origin(b, selection.grid, p)
        out[:, :, y0 : y0 + p, x0 : x0 + p] = blk_tokens.reshape(t, p, p, c).transpose(0, 3, 1, 2)
    return out[..., :h, :w]


def position_encoding(positions: np.ndarray, dim: int) -> np.ndarray:
    """Sinusoidal encoding of ``(t, cx, cy)``; ``dim`` is split across the three coordinates.

    Each coordinate gets sin/cos pairs at frequencies spaced geometrically
    in [1, 1000].
    """
    sizes = [dim // 3 + (1 if i < dim % 3 else 0) for i in range(3)]
    parts = []
    for coord, n in enumerate(sizes):
        if n == 0:
            continue
        n_freq = (n + 1) // 2
        freqs = np.geomspace(1.0, 1000.0, n_freq) if n_freq > 1 else np.ones(1)
        ang = positions[..., coord : coord + 1] * freqs
        enc = np.empty(positions.shape[:-1] + (2 * n_freq,))
        enc[..., 0::2] = np.sin(ang)
        enc[..., 1::2] = np.cos(ang)
        parts.append(enc[..., :n])
    return np.concatenate(parts, axis=-1)


def attention(q: np.ndarray, k: np.ndarray, v: np.ndarray, scale: float) -> tuple[np.ndarray, np.ndarray]:
    """``softmax(q k^T * scale) v`` over the last two axes; returns (output, weights)."""
    weights = softmax(np.einsum("...nd,...md->...nm", q, k) * scale, axis=-1)
    return np.einsum("...nm,...md->...nd", weights, v), weights


def multi_head_attention(q, k, v, heads: int, scale: float) -> tuple[np.ndarray, np.ndarray]:
    n, d = q.shape
    split = lambda a: a.reshape(a.shape[0], heads, d // heads).transpose(1, 0, 2)  # noqa: E731
    out, weights = attention(split(q), split(k), split(v), scale)
    return out.transpose(1, 0, 2).reshape(n, d), weights


@dataclass(frozen=True)
class AttnBranch:
    """Projections and refinement for the tokens of one modality."""

    query: Linear  # C -> d
    key: Linear  # C -> d
    value: Linear  # C -> d
    out: Linear  # d -> C
    gate: np.ndarray  # (C,) logits of the residual gate
    ffn_in: Linear  # C -> hidden
    ffn_out: Linear  # hidden -> C

    @classmethod
    def init(cls, channels: int, cfg: ScamConfig, rng: np.random.Generator) -> "AttnBranch":
        d, hid = cfg.attn_dim(channels), cfg.ffn_hidden(channels)
        return cls(
            Linear.init(channels, d, rng),
            Linear.init(channels, d, rng),
            Linear.init(channels, d, rng),
            Linear.init(d, channels, rng),
            uniform(rng, (channels,)),
            Linear.init(channels, hid, rng),
            Linear.init(hid, channels, rng),
        )

    @classmethod
    def zeros(cls, channels: int, cfg: ScamConfig) -> "AttnBranch":
        d, hid = cfg.attn_dim(channels), cfg.ffn_hidden(channels)
        return cls(
            Linear.zeros(channels, d),
            Linear.zeros(channels, d),
            Linear.zeros(channels, d),
            Linear.zeros(d, channels),
            np.zeros(channels),
            Linear.zeros(channels, hid),
            Linear.zeros(hid, channels),
        )

    def refine(self, tokens: np.ndarray, attended: np.ndarray) -> np.ndarray:
        y = tokens + sigmoid(self.gate) * self.out(attended)
        return y + self.ffn_out(relu(self.ffn_in(y)))


@dataclass(frozen=True)
class ScamParams:
    ir: AttnBranch
    vi: AttnBranch
    local_ir: LocalBlock
    local_vi: LocalBlock
    fuse: GatedFuse

    @property
    def channels(self) -> int:
        return self.ir.gate.shape[0]

    @classmethod
    def init(cls, channels: int, cfg: ScamConfig, seed: int = 0) -> "ScamParams":
        rng = np.random.default_rng(seed)
        return cls(
            AttnBranch.init(channels, cfg, rng),
            AttnBranch.init(channels, cfg, rng),
            LocalBlock.init(channels, rng),
            LocalBlock.init(channels, rng),
            GatedFuse.init(channels, rng),
        )

    @classmethod
    def zeros(cls, channels: int, cfg: ScamConfig) -> "ScamParams":
        return cls(
            AttnBranch.zeros(channels, cfg),
            AttnBranch.zeros(channels, cfg),
            LocalBlock.zeros(channels),
            LocalBlock.zeros(channels),
            GatedFuse.zeros(channels),
        )


def cross_attention(
    tokens_ir: TokenSet,
    tokens_vi: TokenSet,
    cfg: ScamConfig,
    params: ScamParams,
    return_weights: bool = False,
):
    """Bidirectional attention per selected block; infrared queries visible and vice versa.

    Returns the refined ``(updated_ir, updated_vi)`` token arrays and, with
    ``return_weights``, the per-block attention weights of both directions
    shaped ``(K, heads, N, N)``.
    """
    if tokens_ir.tokens.shape != tokens_vi.tokens.shape:
        raise DimensionError(
            f"token geometry mismatch: {tokens_ir.tokens.shape} vs {tokens_vi.tokens.shape}"
        )
    c = tokens_ir.tokens.shape[-1]
    d = cfg.attn_dim(c)
    scale = 1.0 / math.sqrt(d)
    up_ir, up_vi, w_ir, w_vi = [], [], [], []
    for b in range(tokens_ir.tokens.shape[0]):
        x_ir = tokens_ir.tokens[b] + position_encoding(tokens_ir.positions[b], c)
        x_vi = tokens_vi.tokens[b] + position_encoding(tokens_vi.positions[b], c)
        a_ir, wi = multi_head_attention(
            params.ir.query(x_ir), params.vi.key(x_vi), params.vi.value(x_vi), cfg.heads, scale
        )
        a_vi, wv = multi_head_attention(
            params.vi.query(x_vi), params.ir.key(x_ir), params.ir.value(x_ir), cfg.heads, scale
        )
        up_ir.append(params.ir.refine(tokens_ir.tokens[b], a_ir))
        up_vi.append(params.vi.refine(tokens_vi.tokens[b], a_vi))
        w_ir.append(wi)
        w_vi.append(wv)
    shape = tokens_ir.tokens.shape
    up_ir_arr = np.stack(up_ir) if up_ir else np.zeros(shape)
    up_vi_arr = np.stack(up_vi) if up_vi else np.zeros(shape)
    if return_weights:
        return up_ir_arr, up_vi_arr, np.stack(w_ir), np.stack(w_vi)
    return up_ir_arr, up_vi_arr


def scam_trace(h_ir, h_vi, cfg: ScamConfig, params: ScamParams, fuse_gate=None) -> dict:
    ir = as_clip_array(h_ir, "h_ir")
    vi = as_clip_array(h_vi, "h_vi")
    check_same_shape(h_ir=ir, h_vi=vi)
    if ir.shape[1] != params.channels:
        raise DimensionError(f"SCAM params built for C={params.channels}, input has C={ir.shape[1]}")
    p = cfg.block_size
    sel = importance_scores(ir, vi, cfg)
    tok_ir = gather_tokens(ir, sel, p)
    tok_vi = gather_tokens(vi, sel, p)
    up_ir, up_vi, w_ir, w_vi = cross_attention(tok_ir, tok_vi, cfg, params, return_weights=True)
    attn_ir = scatter_tokens(ir, up_ir, sel, p)
    attn_vi = scatter_tokens(vi, up_vi, sel, p)
    branch_ir = attn_ir + params.local_ir(ir)
    branch_vi = attn_vi + params.local_vi(vi)
    return {
        "selection": sel,
        "weights_ir": w_ir,
        "weights_vi": w_vi,
        "attn_ir": attn_ir,
        "attn_vi": attn_vi,
        "out": params.fuse(branch_ir, branch_vi, gate=fuse_gate),
    }


def scam_forward(h_ir, h_vi, cfg: ScamConfig, params: ScamParams, fuse_gate=None) -> np.ndarray:
    return scam_trace(h_ir, h_vi, cfg, params, fuse_gate)["out"]
