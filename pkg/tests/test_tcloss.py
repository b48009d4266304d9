from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from freqfuse.errors import DimensionError, InsufficientFramesError, ParameterError
from freqfuse.synthetic import powerlaw_texture
from freqfuse.tcloss import (
    TcConfig,
    composite_objective,
    estimate_shift,
    lowfreq_project,
    modality_weights,
    tc_loss,
)
from freqfuse.video import normalize_frames

seeds = st.integers(0, 2**31 - 1)


def textured_pair(seed: int, u: int, v: int, size: int = 40):
    """``(moving, centre)`` frames with ``warp(moving, (u, v)) == centre`` in the interior."""
    tex = powerlaw_texture(np.random.default_rng(seed), size + 16, size + 16, 1.0)
    centre = tex[8 : 8 + size, 8 : 8 + size]
    moving = tex[8 + v : 8 + v + size, 8 + u : 8 + u + size]
    return normalize_frames(moving), normalize_frames(centre)


class TestProjection:
    def test_static_gray_clip(self):
        low, norm = lowfreq_project(np.full((3, 1, 10, 10), 0.4))
        np.testing.assert_allclose(low, 0.4, atol=1e-12)
        assert not norm.any()

    def test_rgb_with_equal_channels(self, rng):
        gray = rng.random((3, 1, 12, 12))
        a = lowfreq_project(np.repeat(gray, 3, axis=1))
        b = lowfreq_project(gray)
        np.testing.assert_allclose(a[0], b[0], atol=1e-12)
        np.testing.assert_allclose(a[1], b[1], atol=1e-9)

    def test_frames_are_centred(self, rng):
        _, norm = lowfreq_project(rng.random((4, 1, 12, 12)))
        assert np.all(np.abs(norm.mean(axis=(1, 2))) < 1e-5)

    def test_needs_two_frames(self):
        with pytest.raises(InsufficientFramesError):
            lowfreq_project(np.zeros((1, 1, 8, 8)))


class TestEstimateShift:
    def test_identical_textured_frames(self):
        f, _ = textured_pair(0, 0, 0)
        est = estimate_shift(f, f)
        assert est.argmin_shift() == (0, 0)
        assert np.hypot(*est.shift) < 0.15

    def test_flat_frames_uniform(self):
        z = np.zeros((9, 9))
        est = estimate_shift(z, z)
        np.testing.assert_allclose(est.distribution, 1 / 25)
        assert est.shift == (0.0, 0.0)
        assert est.confidence == 0.0

    def test_unit_translation(self):
        fi, fc = textured_pair(1, 1, 0)
        est = estimate_shift(fi, fc)
        assert est.argmin_shift() == (1, 0)
        assert abs(est.shift[0] - 1) < 0.25 and abs(est.shift[1]) < 0.25

    def test_matches_cost_and_softmax_oracle(self, rng):
        fi, fc = rng.normal(size=(2, 9, 11))
        est = estimate_shift(fi, fc)
        costs = oracles.shift_cost_map(fi, fc)
        np.testing.assert_allclose(est.cost_map, costs, atol=1e-12)
        shift, conf = oracles.soft_shift(costs)
        np.testing.assert_allclose(est.shift, shift, atol=1e-12)
        assert est.confidence == pytest.approx(conf, abs=1e-12)

    def test_frame_too_small(self):
        with pytest.raises(ParameterError):
            estimate_shift(np.zeros((4, 4)), np.zeros((4, 4)))

    @given(seeds, st.floats(1e-3, 1e3))
    def test_distribution_normalized_and_shift_bounded(self, seed, scale):
        rng = np.random.default_rng(seed)
        fi, fc = rng.normal(0, scale, (2, 8, 8))
        est = estimate_shift(fi, fc)
        assert abs(est.distribution.sum() - 1) < 1e-12
        assert est.distribution.min() >= 0 and est.distribution.max() <= 1
        assert max(abs(est.shift[0]), abs(est.shift[1])) <= 2
        assert 0 <= est.confidence <= 1

    @given(seeds, st.integers(-2, 2), st.integers(-2, 2))
    def test_low_temperature_approaches_argmin(self, seed, u, v):
        fi, fc = textured_pair(seed % 1000, u, v, size=24)
        est = estimate_shift(fi, fc, TcConfig(softmax_temp=1e-3))
        assert est.argmin_shift() == oracles.argmin_shift(oracles.shift_cost_map(fi, fc))
        np.testing.assert_allclose(est.shift, est.argmin_shift(), atol=1e-2)


class TestModalityWeights:
    def test_equal_confidences(self):
        assert modality_weights(0.3, 0.3) == (0.5, 0.5)

    def test_logistic_example(self):
        w_vi, w_ir = modality_weights(0.75, 0.5, 8.0)
        assert w_vi == pytest.approx(0.8808, abs=1e-4)
        assert w_vi + w_ir == pytest.approx(1.0)

    def test_zero_gain(self):
        assert modality_weights(0.9, 0.1, 0.0) == (0.5, 0.5)


class TestTcLoss:
    def test_static_identical_clips(self, rng):
        clip = np.broadcast_to(rng.random((1, 1, 16, 16)), (5, 1, 16, 16))
        res = tc_loss(clip, clip, clip)
        assert abs(res.l_shift) < 1e-6
        assert abs(res.l_align - 1e-3) < 1e-6
        assert abs(res.l_grad - 1e-3) < 1e-6
        assert abs(res.total - 1.3e-3) < 1e-6

    def test_fused_equals_visible_with_forced_weights(self, rng):
        vi = rng.random((4, 1, 16, 16))
        ir = rng.random((4, 1, 16, 16))
        assert tc_loss(vi, vi, ir, force_weights=(1.0, 0.0)).l_shift < 1e-6

    def test_global_translation(self):
        tex = powerlaw_texture(np.random.default_rng(4), 48, 64, 1.0)
        frames = np.stack([tex[8:40, 10 - i : 42 - i] for i in range(5)])[:, None]
        res = tc_loss(frames, frames, frames)
        assert res.l_shift < 0.05
        _, norm = lowfreq_project(frames)
        for i in range(5):
            expected = (int(np.clip(res.center - i, -2, 2)), 0)
            assert estimate_shift(norm[i], norm[res.center]).argmin_shift() == expected

    def test_matches_full_oracle(self, rng):
        fused, vi, ir = rng.random((3, 3, 1, 12, 12))
        res = tc_loss(fused, vi, ir)
        ref = oracles.tc_total(fused, vi, ir)
        np.testing.assert_allclose((res.l_shift, res.l_align, res.l_grad, res.total), ref, atol=1e-9)

    def test_swap_symmetry_for_identical_sources(self, rng):
        src = rng.random((5, 1, 14, 14))
        fused = rng.random((5, 1, 14, 14))
        a = tc_loss(fused, src, src)
        b = tc_loss(fused, src.copy(), src.copy())
        assert a.total == b.total
        fw = tc_loss(fused, src, src, force_weights=(0.8, 0.2)).total
        bw = tc_loss(fused, src, src, force_weights=(0.2, 0.8)).total
        assert fw == pytest.approx(bw, abs=1e-12)

    def test_even_length_uses_lower_middle(self, rng):
        clip = rng.random((4, 1, 12, 12))
        assert tc_loss(clip, clip, clip).center == 2

    def test_errors(self, rng):
        a = rng.random((3, 1, 12, 12))
        with pytest.raises(DimensionError, match=r"fused=\(3, 12, 12\)"):
            tc_loss(a, rng.random((3, 1, 12, 13)), a)
        with pytest.raises(InsufficientFramesError):
            tc_loss(a[:2], a[:2], a[:2])

    def test_custom_weights(self, rng):
        a, b, c = rng.random((3, 3, 1, 12, 12))
        base = tc_loss(a, b, c)
        only_align = tc_loss(a, b, c, replace(TcConfig(), w_shift=0.0, w_grad=0.0))
        assert only_align.total == pytest.approx(base.l_align)

    def test_composite_objective(self):
        assert composite_objective(2.0, 0.5, {"int": (1.0, 3.0), "grad": (2.0, 0.25)}) == pytest.approx(4.5)
