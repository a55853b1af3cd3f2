import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lrperc.ensemble import EnsembleSpec, EntryDistribution, RegimeWarning, empirical_moment_report, sample_matrix
from lrperc.profiles import make_profile
from lrperc.rng import ENTRY_STREAM, MASK_STREAM, check_seed, open_uniform, row_bits, row_uniforms


def test_philox_rows_are_order_independent():
    a = row_bits(7, 3, 11, MASK_STREAM, 50)
    row_bits(7, 3, 12, MASK_STREAM, 50)  # unrelated draw in between
    assert np.array_equal(a, row_bits(7, 3, 11, MASK_STREAM, 50))
    assert not np.array_equal(a, row_bits(7, 3, 11, ENTRY_STREAM, 50))
    assert not np.array_equal(a, row_bits(7, 4, 11, MASK_STREAM, 50))


def test_prefix_stability():
    # a shorter request is a prefix of a longer one
    assert np.array_equal(row_uniforms(1, 0, 5, 1, 10), row_uniforms(1, 0, 5, 1, 30)[:10])


def test_open_uniform_range():
    u = open_uniform(np.array([0, 2**64 - 1], dtype=np.uint64))
    assert 0.0 < u[0] < 1e-15
    assert 1.0 - 1e-15 < u[1] < 1.0


def test_seed_range():
    assert check_seed(2**64 - 1) == 2**64 - 1
    with pytest.raises(ValueError):
        check_seed(-1)
    with pytest.raises(ValueError):
        check_seed(2**64)


@pytest.mark.parametrize("kind,V4,V6", [("gaussian", 3.0, 15.0), ("rademacher", 1.0, 1.0), ("uniform", 9 / 5, 27 / 7)])
def test_distribution_moments(kind, V4, V6):
    d = EntryDistribution(kind, 1.3)
    assert d.v2 == pytest.approx(1.69)
    assert d.V4 == pytest.approx(V4 * 1.3**4)
    assert d.V6 == pytest.approx(V6 * 1.3**6)


def test_uniform_transform_matches_moments():
    u = (np.arange(200000) + 0.5) / 200000
    for kind in ("gaussian", "rademacher", "uniform"):
        d = EntryDistribution(kind)
        x = d.from_uniform(u)
        assert abs(np.mean(x)) < 1e-12
        assert np.mean(x**2) == pytest.approx(1.0, rel=2e-4)
        assert np.mean(x**4) == pytest.approx(d.V4, rel=2e-3)


def test_spec_validation():
    with pytest.raises(ValueError):
        EnsembleSpec(3, 0.5)
    with pytest.raises(ValueError):
        EnsembleSpec(3, 8.0)  # N = 7
    with pytest.raises(ValueError):
        EntryDistribution("cauchy")
    assert EnsembleSpec(3, 7.0).N == 7


def test_regime_warning():
    with pytest.warns(RegimeWarning):
        EnsembleSpec(1000, 2.0, alpha_check=0.5)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        EnsembleSpec(1000, 50.0, alpha_check=0.5)


def test_symmetric_and_deterministic():
    spec = EnsembleSpec(40, 6.5)
    m1 = sample_matrix(spec, 123, 4).matrix
    m2 = sample_matrix(spec, 123, 4).matrix
    assert np.array_equal(m1, m1.T)
    assert np.array_equal(m1, m2)
    assert not np.array_equal(m1, sample_matrix(spec, 123, 5).matrix)


def test_indicator_band_structure():
    # b = N keeps exactly the offsets |i - j| < N / 2
    spec = EnsembleSpec(10, 21.0, profile=make_profile("indicator"))
    h = sample_matrix(spec, 1, 0).matrix
    k = np.abs(np.subtract.outer(np.arange(21), np.arange(21)))
    assert np.all(h[k <= 10] != 0.0)
    assert np.all(h[k > 10] == 0.0)
    with pytest.raises(ValueError):
        EnsembleSpec(10, 42.0, profile=make_profile("indicator"))


def test_mean_row_mask_count():
    spec = EnsembleSpec(500, 50.0)
    counts = []
    for r in range(3):
        h = sample_matrix(spec, 9, r).matrix
        counts.append(np.count_nonzero(h, axis=1))
    counts = np.concatenate(counts)
    # exact Poisson-binomial mean and sd of the mean over rows
    t = np.arange(spec.N)
    P = spec.profile.psi((t[:, None] - t[None, :]) / spec.b)
    mean = P.sum(axis=1).mean()
    sd = math.sqrt((P * (1 - P)).sum(axis=1).mean() / counts.size)
    assert abs(counts.mean() - mean) < 4 * sd
    assert 40 < mean <= 50  # b int psi minus boundary loss


def test_sparsity_within_5_sigma():
    spec = EnsembleSpec(200, 12.0, profile=make_profile("exponential"))
    t = np.arange(spec.N)
    P = spec.profile.psi((t[:, None] - t[None, :]) / spec.b)
    off = ~np.eye(spec.N, dtype=bool)
    hits = sum(np.count_nonzero(sample_matrix(spec, 2, r).matrix[off]) for r in range(4))
    mean = 4 * P[off].sum()
    sd = math.sqrt(4 * (P * (1 - P))[off].sum() * 2)  # mirrored pairs count twice
    assert abs(hits - mean) < 5 * sd


@pytest.mark.parametrize("kind", ["gaussian", "rademacher", "uniform"])
def test_moment_report(kind):
    spec = EnsembleSpec(20, 5.0, dist=EntryDistribution(kind))
    rows = {r.name: r for r in empirical_moment_report(spec, 3, 100)}
    assert not any(r.flagged for r in rows.values())
    if kind == "rademacher":
        assert rows["E{a^4}"].empirical == 1.0
    assert rows["Var{a_diag}"].target == 2.0


def test_moment_report_needs_100():
    with pytest.raises(ValueError):
        empirical_moment_report(EnsembleSpec(5, 2.0), 0, 99)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 12), st.floats(1.0, 25.0), st.integers(0, 2**64 - 1), st.integers(0, 10**6),
       st.sampled_from(["gaussian", "rademacher", "uniform"]))
def test_symmetry_property(n, b, seed, r, kind):
    N = 2 * n + 1
    spec = EnsembleSpec(n, min(b, N), dist=EntryDistribution(kind))
    h = sample_matrix(spec, seed, r).matrix
    assert h.shape == (N, N)
    assert np.array_equal(h, h.T)
    assert np.all(np.isfinite(h))


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 10), st.integers(0, 1000))
def test_rows_depend_only_on_counter(n, seed):
    # growing n must not change the draws of the shared leading block
    small = sample_matrix(EnsembleSpec(n, 2.0), seed, 0).matrix
    big = sample_matrix(EnsembleSpec(n + 1, 2.0), seed, 0).matrix
    N = 2 * n + 1
    # row k of the bigger matrix uses count N+2-k draws; prefixes coincide
    assert np.array_equal(small[0, :], big[0, :N])
