import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from freqfuse.errors import ParameterError
from freqfuse.rankstats import adjacent_separation, pearson, rank_stats, spearman

seeds = st.integers(0, 2**31 - 1)
EXACT = ("global_spearman", "global_pearson", "mean_seq_spearman", "monotonic_rate", "pairwise_acc")


def test_perfect_agreement():
    v = np.tile(np.arange(5.0), (4, 1))
    s = rank_stats(v)
    assert s.global_spearman == pytest.approx(1.0)
    assert s.global_pearson == pytest.approx(1.0)
    assert s.mean_seq_spearman == pytest.approx(1.0)
    assert s.monotonic_rate == 1.0 and s.pairwise_acc == 1.0


def test_constant_values():
    s = rank_stats(np.full((3, 4), 2.5))
    assert s.global_spearman == 0 and s.global_pearson == 0
    assert s.monotonic_rate == 0 and s.pairwise_acc == 0.5
    assert s.adjacent_sep == 0


def test_random_matrix_matches_brute_force(rng):
    v = rng.random((6, 5))
    s = rank_stats(v)
    ref = oracles.rank_stats(v.tolist())
    for key in EXACT:
        assert getattr(s, key) == pytest.approx(ref[key], abs=1e-9)


def test_higher_better_is_negated(rng):
    v = rng.random((4, 6))
    assert rank_stats(v) == rank_stats(-v, direction="higher-better")


def test_adjacent_separation_cohens_d():
    v = np.array([[0.0, 1.0], [2.0, 3.0]])
    # per-level means 1 and 2, population std 1 at both levels
    assert adjacent_separation(v) == pytest.approx(1.0)
    assert adjacent_separation(v[:, ::-1]) == 0.0


def test_errors():
    with pytest.raises(ParameterError):
        rank_stats(np.zeros((3, 1)))
    with pytest.raises(ParameterError):
        rank_stats(np.array([[0.0, np.nan]]))
    with pytest.raises(ParameterError):
        rank_stats(np.zeros((2, 3)), severities=[1, 2])
    with pytest.raises(ParameterError):
        rank_stats(np.zeros((2, 3)), direction="sideways")


def test_ties_use_average_ranks():
    x = [3.0, 1.0, 3.0, 2.0]
    assert oracles.average_ranks(x) == [3.5, 1.0, 3.5, 2.0]
    assert spearman(x, [4, 1, 3, 2]) == pytest.approx(oracles.spearman(x, [4, 1, 3, 2]), abs=1e-12)


@given(seeds)
def test_spearman_invariant_under_monotone_transforms(seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(4, 5))
    base = rank_stats(v)
    for transformed in (np.exp(v), v**3):
        s = rank_stats(transformed)
        assert s.global_spearman == pytest.approx(base.global_spearman, abs=1e-12)
        assert s.mean_seq_spearman == pytest.approx(base.mean_seq_spearman, abs=1e-12)


@given(seeds, st.floats(0.01, 100), st.floats(-100, 100))
def test_order_stats_invariant_under_positive_affine(seed, a, b):
    rng = np.random.default_rng(seed)
    v = rng.integers(0, 4, size=(3, 5)).astype(float)  # ties included
    base = rank_stats(v)
    s = rank_stats(a * v + b)
    assert s.pairwise_acc == base.pairwise_acc
    assert s.monotonic_rate == base.monotonic_rate


@given(seeds)
def test_pearson_bounded(seed):
    rng = np.random.default_rng(seed)
    x, y = rng.normal(size=(2, 7))
    assert -1 <= pearson(x, y) <= 1
