import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nsyk.errors import DegenerateSpectrumError, InsufficientDataError, InvalidArgumentError
from nsyk.spacing import (SpacingStats, collapse_degenerate, ensemble_mean_r, spacing_histogram,
                          spacing_ratios, trim_edges, unit_spacings)


def test_equal_spacings():
    s = spacing_ratios(np.array([1.0, 2.0, 3.0, 4.0]), edge_trim=0.0)
    assert s.r_values.tolist() == [1.0, 1.0]
    assert s.mean_r == 1.0
    assert s.n_spacings == 2


def test_geometric_spacings():
    s = spacing_ratios(np.array([7.0, 0.0, 3.0, 1.0]), edge_trim=0.0)
    np.testing.assert_allclose(s.r_values, [0.5, 0.5])
    assert s.mean_r == pytest.approx(0.5)


def test_naive_oracle(rng):
    levels = np.sort(rng.random(101))
    gaps = np.diff(levels)
    oracle = [min(gaps[i], gaps[i + 1]) / max(gaps[i], gaps[i + 1]) for i in range(len(gaps) - 1)]
    s = spacing_ratios(levels, edge_trim=0.0)
    np.testing.assert_allclose(s.r_values, oracle, rtol=1e-15)
    assert s.std_error == pytest.approx(np.std(oracle, ddof=1) / math.sqrt(len(oracle)))


def test_edge_trim_counts():
    levels = np.arange(20.0)
    assert trim_edges(levels, 0.1).tolist() == list(range(2, 18))
    assert spacing_ratios(levels, 0.1).n_spacings == 14
    with pytest.raises(InvalidArgumentError):
        trim_edges(levels, 0.5)


levels_strategy = st.lists(st.floats(-100, 100, allow_nan=False), min_size=8, max_size=40, unique=True)


@settings(max_examples=60, deadline=None)
@given(levels_strategy, st.floats(0.01, 100), st.floats(-50, 50))
def test_affine_invariance(levels, scale, shift):
    x = np.array(levels)
    if np.min(np.diff(np.sort(x))) < 1e-6:
        return
    a = spacing_ratios(x, 0.0)
    b = spacing_ratios(scale * x + shift, 0.0)
    np.testing.assert_allclose(a.r_values, b.r_values, rtol=1e-6, atol=1e-9)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
@settings(max_examples=40, deadline=None)
@given(levels_strategy, st.randoms(use_true_random=False))
def test_permutation_invariance(levels, random):
    x = np.array(levels)
    shuffled = x.copy()
    random.shuffle(shuffled)
    assert np.array_equal(spacing_ratios(x, 0.1).r_values, spacing_ratios(shuffled, 0.1).r_values)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
@settings(max_examples=40, deadline=None)
@given(levels_strategy)
def test_ratio_range(levels):
    r = spacing_ratios(np.array(levels), 0.0).r_values
    assert np.all((r >= 0) & (r <= 1))


def test_degenerate_handling():
    # one zero spacing gives r = 0; two in a row are 0/0 and dropped
    s = spacing_ratios(np.array([0.0, 1.0, 1.0, 1.0, 2.0, 4.0]), 0.0)
    assert s.n_excluded == 1
    np.testing.assert_allclose(s.r_values, [0.0, 0.0, 0.5])
    with pytest.raises(DegenerateSpectrumError):
        spacing_ratios(np.ones(10), 0.0)
    with pytest.raises(InsufficientDataError):
        spacing_ratios(np.array([1.0, 2.0, 3.0]), 0.0)


def test_degeneracy_warning_and_collapse():
    paired = np.repeat(np.cumsum(np.arange(1, 21, dtype=float)), 2)
    with pytest.warns(RuntimeWarning):
        spacing_ratios(paired, 0.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        s = spacing_ratios(paired, 0.0, collapse=True)
    np.testing.assert_allclose(s.r_values, spacing_ratios(paired[::2], 0.0).r_values)
    assert collapse_degenerate(np.array([0.0, 1e-12, 1.0, 2.0]), 1e-8).tolist() == [0.0, 1.0, 2.0]


def _stats(r):
    r = np.asarray(r, dtype=float)
    return SpacingStats(r, float(r.mean()), 0.0, len(r), 0.0, 1e-8)


def test_ensemble_pooling():
    mean, se = ensemble_mean_r([_stats([0.4, 0.4]), _stats([0.6, 0.6])])
    assert mean == pytest.approx(0.5)
    assert se == pytest.approx(0.1)
    mean, _ = ensemble_mean_r([_stats([0.4]), _stats([0.6, 0.6, 0.6])])
    assert mean == pytest.approx(0.55)
    with pytest.raises(InvalidArgumentError):
        ensemble_mean_r([])


def test_poisson_surrogate():
    # i.i.d. exponential spacings, 10^4 levels x 100 draws
    rng = np.random.default_rng(2024)
    stats = [spacing_ratios(np.cumsum(rng.exponential(size=10_000)), 0.1) for _ in range(100)]
    mean, _ = ensemble_mean_r(stats)
    assert abs(mean - (2 * math.log(2) - 1)) <= 0.004


def test_unit_spacings_and_histogram():
    rng = np.random.default_rng(1)
    spectra = [np.sort(rng.random(400)) for _ in range(50)]
    u = unit_spacings(spectra[0])
    assert u.mean() == pytest.approx(1.0)
    h = spacing_histogram(spectra)
    assert np.sum(h.densities * np.diff(h.bin_edges)) == pytest.approx(1.0)
    np.testing.assert_allclose(np.diff(h.bin_edges), 0.1)
    assert h.n_spacings == 50 * (320 - 1)
    h2 = spacing_histogram(spectra, bins=np.linspace(0, 3, 31))
    np.testing.assert_allclose(h2.centers[:2], [0.05, 0.15])
    assert np.argmax(h2.densities) == 0


def test_equal_spacing_histogram_is_delta_like():
    h = spacing_histogram([np.arange(50.0)], bins=np.linspace(0, 2, 21))
    assert h.densities[10] == pytest.approx(10.0)
    assert np.count_nonzero(h.densities) == 1
