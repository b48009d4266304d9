import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from freqfuse.errors import InsufficientFramesError, MissingInputError, ParameterError
from freqfuse.perturb import FAMILIES, PerturbSpec, apply, apply_logged, displacement_field, shuffle_window
from freqfuse.rankstats import pearson

seeds = st.integers(0, 2**31 - 1)


def sources(rng, t=6, h=12, w=12):
    ir = rng.random((t, 1, h, w))
    vi = rng.random((t, 1, h, w))
    return ir, vi, 0.5 * (ir + vi)


@pytest.mark.parametrize("family", FAMILIES)
def test_zero_strength_is_bitwise_identity(rng, family):
    ir, vi, fused = sources(rng)
    out = apply(fused, PerturbSpec(family, 0.0, 3), sources=(ir, vi))
    assert out.tobytes() == fused.tobytes()


@pytest.mark.parametrize("family", FAMILIES)
def test_deterministic_and_in_range(rng, family):
    ir, vi, fused = sources(rng)
    spec = PerturbSpec(family, 2.0, 11)
    a = apply(fused, spec, sources=(ir, vi))
    b = apply(fused, spec, sources=(ir, vi))
    assert a.tobytes() == b.tobytes()
    assert np.all(np.isfinite(a)) and a.min() >= 0 and a.max() <= 1.5
    assert not np.array_equal(a, fused)


def test_flicker_gain_round_trip(rng):
    clip = rng.uniform(0.1, 0.9, (5, 1, 8, 8))
    out, log = apply_logged(clip, PerturbSpec("flicker", 2.0, 4))
    gains = np.array(log["gains"])
    assert np.all(np.abs(gains - 1) <= 0.2)
    np.testing.assert_allclose(out / gains[:, None, None, None], clip, atol=1e-6)


@given(seeds, st.floats(0.1, 3.0))
def test_flicker_preserves_frame_structure(seed, strength):
    rng = np.random.default_rng(seed)
    clip = rng.uniform(0.1, 0.9, (4, 1, 6, 6))
    out = apply(clip, PerturbSpec("flicker", strength, seed))
    for i in range(4):
        assert pearson(clip[i].ravel(), out[i].ravel()) == pytest.approx(1.0, abs=1e-6)


def test_shuffle_preserves_frames(rng):
    clip = rng.random((6, 1, 4, 4))
    out, log = apply_logged(clip, PerturbSpec("temporal_shuffle", 4.0, 2))
    assert log["window"] == 6
    assert sorted(map(bytes, (f.tobytes() for f in out))) == sorted(map(bytes, (f.tobytes() for f in clip)))
    assert sorted(log["order"]) == list(range(6))
    assert log["order"] != list(range(6))


@given(seeds, st.floats(0.0, 6.0), st.integers(2, 12))
def test_shuffle_is_a_windowed_permutation(seed, strength, t):
    clip = np.arange(t, dtype=float)[:, None, None, None] * np.ones((t, 1, 2, 2))
    out, log = apply_logged(clip, PerturbSpec("temporal_shuffle", strength, seed))
    win = shuffle_window(strength, t)
    order = out[:, 0, 0, 0].astype(int)
    for start in range(0, t, win):
        block = order[start : start + win]
        assert sorted(block) == list(range(start, start + len(block)))


def test_shuffle_window_rounding():
    assert [shuffle_window(s, 64) for s in (0.5, 1.0, 1.5, 2.0, 2.5, 3.0)] == [3, 3, 4, 4, 5, 5]
    assert shuffle_window(10, 6) == 6


def test_jitter_shift_bound(rng):
    clip = rng.random((8, 1, 10, 10))
    _, log = apply_logged(clip, PerturbSpec("jitter", 1.5, 1))
    assert np.all(np.hypot(*np.array(log["shifts"]).T) <= 1.5)


def test_displacement_peak():
    field = displacement_field((4, 20, 20), 2.5, np.random.default_rng(0))
    assert np.sqrt(field[:, 0] ** 2 + field[:, 1] ** 2).max() == pytest.approx(2.5)


def test_modality_drift_moves_toward_infrared(rng):
    ir, vi, fused = sources(rng)
    out, log = apply_logged(fused, PerturbSpec("modality_drift", 3.0), sources=(ir, vi))
    offsets = np.array(log["blend_offset"])
    assert offsets[0] == 0 and np.all(np.diff(offsets) > 0)
    np.testing.assert_allclose(out, np.clip(fused + offsets[:, None, None, None] * (ir - vi), 0, 1.5))


@pytest.mark.parametrize("family", ["flicker", "local_misalignment"])
def test_deviation_grows_with_strength(family):
    rng = np.random.default_rng(5)
    clip = rng.uniform(0.1, 0.8, (6, 1, 24, 24))
    devs = [np.linalg.norm(apply(clip, PerturbSpec(family, s, 9)) - clip) for s in (0, 0.5, 1, 2, 3, 4)]
    assert all(b >= a for a, b in zip(devs, devs[1:]))


def test_errors(rng):
    clip = rng.random((3, 1, 4, 4))
    with pytest.raises(MissingInputError):
        apply(clip, PerturbSpec("modality_drift", 1.0))
    with pytest.raises(ParameterError):
        PerturbSpec("blur", 1.0)
    with pytest.raises(ParameterError):
        PerturbSpec("flicker", -1.0)
    with pytest.raises(InsufficientFramesError):
        apply(clip[:1], PerturbSpec("temporal_shuffle", 1.0))
