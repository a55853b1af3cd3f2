import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lrperc.ensemble import EnsembleSpec, EntryDistribution, sample_matrix
from lrperc.montecarlo import (
    CorrelationRecord,
    WORKERS_ENV,
    correlation_vs_theory,
    covariance,
    default_workers,
    density_experiment,
    entry_shift_experiment,
    estimate_resolvent_stats,
    ladder_alpha,
    read_csv,
    resolvent_samples,
    variance_scaling_experiment,
    write_csv,
    write_json,
)
from lrperc.spectra import eigenvalues_symmetric, resolvent_traces

SMALL = EnsembleSpec(30, 10.0)


def test_samples_match_direct_computation():
    g = resolvent_samples(SMALL, [4j, 1 + 3j], 3, 5)
    for r in range(3):
        lam = eigenvalues_symmetric(sample_matrix(SMALL, 5, r)).eigenvalues
        assert np.array_equal(g[r], resolvent_traces(lam, np.array([4j, 1 + 3j])))


def test_start_offset_continues_stream():
    whole = resolvent_samples(SMALL, [4j], 6, 2)
    tail = resolvent_samples(SMALL, [4j], 2, 2, start=4)
    assert np.array_equal(whole[4:], tail)


def test_worker_count_invariance():
    a = estimate_resolvent_stats(SMALL, [4j, -4j], 7, 11, workers=1).rows()
    b = estimate_resolvent_stats(SMALL, [4j, -4j], 7, 11, workers=3).rows()
    assert json.dumps(a) == json.dumps(b)


def test_default_workers(monkeypatch):
    monkeypatch.setenv(WORKERS_ENV, "3")
    assert default_workers() == 3
    monkeypatch.setenv(WORKERS_ENV, "zero")
    with pytest.raises(ValueError):
        default_workers()


def test_covariance_definitions():
    rng = np.random.default_rng(0)
    a = rng.normal(size=50) + 1j * rng.normal(size=50)
    b = rng.normal(size=50) + 1j * rng.normal(size=50)
    c, se, loo = covariance(a, b)
    assert c == pytest.approx(np.mean(a * b) * 50 / 49 - np.mean(a) * np.mean(b) * 50 / 49)
    assert covariance(b, a)[0] == c
    # z2 = z1 is the sample variance, unconjugated
    assert covariance(a, a)[0] == pytest.approx(np.sum((a - a.mean()) ** 2) / 49)
    assert covariance(a, np.conj(a))[0] == pytest.approx(np.var(a, ddof=1))
    assert se > 0 and loo.shape == (50,)
    c2, se2, loo2 = covariance(a[:2], b[:2])
    assert loo2 is None and se2 > 0 and math.isfinite(se2)


def test_jackknife_matches_brute_force():
    rng = np.random.default_rng(1)
    a = rng.normal(size=12) + 1j * rng.normal(size=12)
    b = rng.normal(size=12)
    _, se, loo = covariance(a, b)
    brute = np.array([np.cov(np.delete(a, i), np.delete(b, i), bias=False) for i in range(12)])
    direct = []
    for i in range(12):
        x, y = np.delete(a, i), np.delete(b, i)
        direct.append(np.sum((x - x.mean()) * (y - y.mean())) / 10)
    assert np.allclose(loo, direct, rtol=1e-12)
    assert brute.shape[0] == 12


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 40), st.integers(0, 10**6))
def test_covariance_properties(R, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=R) + 1j * rng.normal(size=R)
    b = rng.normal(size=R) + 1j * rng.normal(size=R)
    c, se, _ = covariance(a, b)
    assert covariance(b, a)[0] == c
    assert se >= 0 and math.isfinite(se)


def test_stats_mean_near_w():
    rep = estimate_resolvent_stats(EnsembleSpec(500, 100.0), [4j], 20, 0)
    m = rep.get("mean_g", 4j)
    assert abs(m.value - 1j * (math.sqrt(5) - 2)) < 0.02
    assert m.stderr > 0


def test_covariance_of_conjugate_pair_is_real():
    rep = estimate_resolvent_stats(SMALL, [4j, -4j], 200, 3)
    c = rep.get("cov", 4j, -4j)
    assert abs(c.value.imag) <= 3 * c.stderr + 1e-15


def test_stderr_scales_like_inverse_sqrt_R():
    small = estimate_resolvent_stats(SMALL, [4j], 400, 8).get("abs_var_g", 4j).stderr
    big = estimate_resolvent_stats(SMALL, [4j], 800, 8).get("abs_var_g", 4j).stderr
    assert small / big == pytest.approx(math.sqrt(2), rel=0.3)


def test_rows_and_csv_round_trip(tmp_path):
    rep = estimate_resolvent_stats(SMALL, [4j, 1 - 3j], 5, 1)
    rows = rep.rows()
    path = tmp_path / "out.csv"
    write_csv(path, rows)
    back = read_csv(path)
    assert len(back) == len(rows)
    for r, s in zip(rows, back):
        for k, val in r.items():
            if isinstance(val, float) and math.isnan(val):
                assert math.isnan(s[k])
            else:
                assert s[k] == val
    text = path.read_bytes().decode()
    assert text.startswith("statistic,z1_re,z1_im,z2_re,z2_im,value_re,value_im,stderr,R,N,b,seed\r\n")
    buf = io.StringIO()
    write_csv(buf, rows)
    assert buf.getvalue() == text


def test_json_summary(tmp_path):
    rep = estimate_resolvent_stats(SMALL, [4j], 3, 1)
    write_json(tmp_path / "s.json", {"z": 1 + 2j, **rep.summary()})
    data = json.loads((tmp_path / "s.json").read_text())
    assert data["z"] == {"re": 1.0, "im": 2.0}
    assert data["seed"] == 1 and "version" in data


def test_density_basic():
    res = density_experiment(EnsembleSpec(100, 30.0), 4, bins=40, seed=1)
    assert res.mass == pytest.approx(1.0, abs=1e-12)
    assert res.outside_fraction == 0.0
    assert res.l1 < 0.3
    assert len(res.rows()) == 40
    with pytest.raises(ValueError):
        density_experiment(SMALL, 2, bins=np.linspace(-2, 2, 5))


def test_scaling_small_ladder_and_guards():
    ladder = [EnsembleSpec(20, 4.1), EnsembleSpec(40, 8.1), EnsembleSpec(80, 16.1)]
    assert ladder_alpha(ladder) == pytest.approx(1.0)
    rows = variance_scaling_experiment(ladder, 4j, 30, 0)
    assert [r.N for r in rows] == [41, 81, 161]
    assert all(r.nb_var > 0 and r.stderr > 0 for r in rows)
    deep = variance_scaling_experiment(ladder, 10j, 30, 0)
    assert all(d.nb_var < r.nb_var for d, r in zip(deep, rows))
    with pytest.raises(ValueError):
        variance_scaling_experiment(ladder, 2j, 30, 0)
    with pytest.raises(ValueError):
        variance_scaling_experiment(ladder[:2], 4j, 30, 0)
    with pytest.raises(ValueError):
        ladder_alpha([EnsembleSpec(20, 5.0), EnsembleSpec(40, 9.0), EnsembleSpec(80, 80.0)])


def test_two_seeds_agree():
    ladder = [EnsembleSpec(20, 4.1), EnsembleSpec(40, 8.1), EnsembleSpec(80, 16.1)]
    a = variance_scaling_experiment(ladder, 4j, 150, 1)
    b = variance_scaling_experiment(ladder, 4j, 150, 2)
    for x, y in zip(a, b):
        assert abs(x.nb_var - y.nb_var) <= 3 * math.hypot(x.stderr, y.stderr)


def test_correlation_record_logic():
    rec = CorrelationRecord(1.1 + 0j, 0.01, 1.0 + 0j, 10, True, 5, 2.0)
    assert rec.envelope == pytest.approx(0.15)
    assert rec.within_envelope
    assert rec.z_score == pytest.approx(10.0)


def test_correlation_doubles_until_budget():
    rec = correlation_vs_theory(SMALL, 4j, -4j, 4, 0, R_max=16, target=1e-9)
    assert rec.R == 16 and not rec.target_met
    with pytest.raises(ValueError):
        correlation_vs_theory(SMALL, 1j, -4j, 10, 0)


def test_shift_experiment_small():
    a = EnsembleSpec(30, 10.0, dist=EntryDistribution("gaussian"))
    b = EnsembleSpec(30, 10.0, dist=EntryDistribution("rademacher"))
    shift, ra, rb = entry_shift_experiment(a, b, 4j, -4j, 40, 0)
    assert shift.delta_change == pytest.approx(-2.0, abs=1e-9)  # V4: 3 -> 1
    assert shift.theory_sign_agrees
    assert shift.empirical == rb.nb_cov - ra.nb_cov
    assert 0 < shift.stderr < max(ra.stderr, rb.stderr)
