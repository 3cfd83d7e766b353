"""Replicated experiments: determinism, statistics, and suite flags."""
import numpy as np
import pytest

from taperspec.functionals import constant, cosine_poly, custom_weight, estimate
from taperspec.models import (derive_seed, exponential_law, gaussian_ar1,
                              gaussian_law, gaussian_white,
                              linear_nongaussian, simulate)
from taperspec.montecarlo import (ExperimentConfig, k_statistics,
                                  replicate_functionals, run_convergence,
                                  run_f4_discrimination, run_normality,
                                  run_suite, standardized_cumulants)
from taperspec.oracle import exact_cov_J, exact_mean_J
from taperspec.periodogram import default_grid
from taperspec.tapers import get_taper

RECT = get_taper("rectangular")
COSINE = get_taper("cosine")
ONE = constant()


def small_config(**overrides):
    base = dict(model=gaussian_white(1.0), taper=RECT, phis=(ONE,), ks=(1,),
                T_sweep=(16,), R=200, base_seed=3)
    base.update(overrides)
    return ExperimentConfig(**base)


# --- config validation -------------------------------------------------------


def test_config_rejects_small_R():
    with pytest.raises(ValueError, match="R ≥ 100"):
        small_config(R=50)


def test_config_rejects_unsorted_sweep():
    with pytest.raises(ValueError):
        small_config(T_sweep=(32, 16))
    with pytest.raises(ValueError):
        small_config(T_sweep=(16, 16))
    with pytest.raises(ValueError):
        small_config(T_sweep=())


def test_config_rejects_length_mismatch():
    with pytest.raises(ValueError):
        small_config(phis=(ONE, ONE), ks=(1,))


def test_config_rejects_unknown_enum_values():
    with pytest.raises(ValueError):
        small_config(center="median")
    with pytest.raises(ValueError):
        small_config(suite="bootstrap")


# --- replicate engine --------------------------------------------------------


def test_replicates_match_single_path_estimates():
    model = gaussian_ar1(0.5, 1.0)
    T, R = 12, 7
    g = default_grid(T)
    vals = replicate_functionals(model, COSINE, (ONE, cosine_poly(1)),
                                 (1, 2), T, R=R, base_seed=41, grid=g)
    assert vals.shape == (R, 2)
    for r in range(R):
        path = simulate(model, T, seed=derive_seed(41, r))
        e1 = estimate(path, COSINE, ONE, 1, g).value
        e2 = estimate(path, COSINE, cosine_poly(1), 2, g).value
        assert vals[r, 0] == pytest.approx(e1, rel=1e-12)
        assert vals[r, 1] == pytest.approx(e2, rel=1e-12)


def test_replicates_deterministic_and_seed_sensitive():
    a = replicate_functionals(gaussian_white(1.0), RECT, (ONE,), (2,),
                              8, R=300, base_seed=1)
    b = replicate_functionals(gaussian_white(1.0), RECT, (ONE,), (2,),
                              8, R=300, base_seed=1)
    c = replicate_functionals(gaussian_white(1.0), RECT, (ONE,), (2,),
                              8, R=300, base_seed=2)
    assert np.array_equal(a, b)       # bitwise
    assert not np.array_equal(a, c)


def test_replicates_worker_count_invariance(monkeypatch):
    kwargs = dict(model=gaussian_ar1(0.4, 1.0), taper=RECT, phis=(ONE,),
                  ks=(1,), T=10, R=700, base_seed=5)

    def run():
        return replicate_functionals(kwargs["model"], kwargs["taper"],
                                     kwargs["phis"], kwargs["ks"],
                                     kwargs["T"], kwargs["R"],
                                     kwargs["base_seed"])

    monkeypatch.setenv("TAPERSPEC_THREADS", "1")
    one = run()
    monkeypatch.setenv("TAPERSPEC_THREADS", "4")
    four = run()
    monkeypatch.setenv("TAPERSPEC_THREADS", "13")
    thirteen = run()
    assert np.array_equal(one, four)  # bitwise, chunk layout is fixed
    assert np.array_equal(one, thirteen)


def test_replicates_prefix_stability():
    # growing R extends the replicate sequence without changing the prefix
    short = replicate_functionals(gaussian_white(1.0), RECT, (ONE,), (1,),
                                  8, R=300, base_seed=9)
    long = replicate_functionals(gaussian_white(1.0), RECT, (ONE,), (1,),
                                 8, R=500, base_seed=9)
    assert np.array_equal(long[:300], short)


# --- sample cumulants --------------------------------------------------------


def test_k_statistics_tiny_sample():
    # x = [0, 0, 0, 1]: every k-statistic equals 1/4
    k1, k2, k3, k4 = k_statistics(np.array([0.0, 0.0, 0.0, 1.0]))
    assert (k1, k2) == (pytest.approx(0.25), pytest.approx(0.25))
    assert (k3, k4) == (pytest.approx(0.25), pytest.approx(0.25))


def test_k_statistics_symmetric_sample():
    _, _, k3, _ = k_statistics(np.array([-2.0, -1.0, 0.0, 1.0, 2.0]))
    assert k3 == pytest.approx(0.0, abs=1e-12)


def test_standardized_cumulants():
    c3, c4 = standardized_cumulants(np.array([0.0, 0.0, 0.0, 1.0]))
    assert c3 == pytest.approx(0.25 / 0.25**1.5)
    assert c4 == pytest.approx(0.25 / 0.25**2)


def test_k_statistics_consistency_on_gaussian():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(200_000)
    k1, k2, k3, k4 = k_statistics(x)
    assert abs(k1) < 0.01 and abs(k2 - 1.0) < 0.02
    assert abs(k3) < 0.02 and abs(k4) < 0.05


# --- suites ------------------------------------------------------------------


def test_convergence_suite_white_passes():
    report = run_convergence(small_config(
        model=gaussian_white(1.0), T_sweep=(8, 16, 32), R=400))
    assert report.suite == "convergence"
    assert report.pass_flags["mean_within_4se"]
    assert report.pass_flags["tvar_final_within_tolerance"]
    # rows carry the pinned fields
    row = report.rows[0]
    for field in ("T", "k", "phi_id", "sample_mean", "oracle_mean",
                  "limit_mean", "T_scaled_cov", "limit_cov", "skew",
                  "exkurt", "c3", "c4", "pass"):
        assert field in row


def test_convergence_oracle_and_sample_agree_ar1():
    report = run_convergence(small_config(
        model=gaussian_ar1(0.5, 1.0), taper=COSINE, T_sweep=(16, 32),
        R=500, base_seed=7))
    for row in report.rows:
        if row["i"] != row["j"]:
            continue
        se = row["se_mean"]
        assert abs(row["sample_mean"] - row["oracle_mean"]) < 4 * se


def test_convergence_rows_match_direct_oracle_calls():
    cfg = small_config(model=gaussian_ar1(0.5, 1.0), taper=COSINE,
                       T_sweep=(12,), R=150, ks=(2,))
    report = run_convergence(cfg)
    row = report.rows[0]
    g = default_grid(12)
    assert row["oracle_mean"] == pytest.approx(
        exact_mean_J(gaussian_ar1(0.5, 1.0), COSINE, 12, ONE, 2, g),
        rel=1e-12)
    assert row["limit_cov"] == pytest.approx(
        12 * exact_cov_J(gaussian_ar1(0.5, 1.0), COSINE, 12, ONE, 2,
                         ONE, 2, g).real, rel=0.5)  # same scale only


def test_normality_suite_flags_structure():
    report = run_normality(small_config(
        T_sweep=(24, 48), R=400, suite="normality"))
    for flag in ("skewness", "excess_kurtosis", "correlation",
                 "cumulant_decay"):
        assert flag in report.pass_flags
    d = report.diagnostics
    assert len(d["standardized_skew"]) == 1
    assert "decay_slopes" in d


def test_normality_single_T_has_no_decay_requirement():
    report = run_normality(small_config(T_sweep=(32,), R=400,
                                        suite="normality"))
    assert report.pass_flags["cumulant_decay"]  # vacuous with one T


def test_normality_sample_centering_fallback():
    # non-gaussian model: oracle means unavailable, sample centering kicks in
    lin = linear_nongaussian(exponential_law(1.0), (1.0,))
    report = run_normality(small_config(
        model=lin, T_sweep=(32,), R=400, suite="normality"))
    assert report.diagnostics["centers"][0] == pytest.approx(
        1.0, abs=0.2)  # int f = kappa2 * sum psi^2 = 1


def test_f4_suite_gaussian_control_indistinguishable():
    # gaussian innovations through the f4 suite: kappa4 = 0, the full and
    # gaussian-only limits coincide, and the suite must say so
    lin = linear_nongaussian(gaussian_law(1.0), (1.0,))
    report = run_f4_discrimination(small_config(
        model=lin, T_sweep=(32,), R=400, suite="f4"))
    assert report.pass_flags["full_formula_closer"]
    comp = report.diagnostics["comparisons"][0]
    assert abs(comp["gap_full"] - comp["gap_gaussian_only"]) < 1e-12


def test_f4_suite_exponential_separates():
    lin = linear_nongaussian(exponential_law(1.0), (1.0,))
    report = run_f4_discrimination(small_config(
        model=lin, T_sweep=(48,), R=1500, suite="f4"))
    assert report.pass_flags["full_formula_closer"]
    comp = report.diagnostics["comparisons"][0]
    assert comp["gap_full"] < comp["gap_gaussian_only"]
    assert comp["separation_in_se"] > 3.0


def test_f4_suite_requires_linear_model():
    with pytest.raises(ValueError):
        run_f4_discrimination(small_config(model=gaussian_white(1.0),
                                           suite="f4"))


def test_run_suite_dispatch():
    rep = run_suite(small_config(T_sweep=(8, 16), R=150))
    assert rep.suite == "convergence"
    rep = run_suite(small_config(T_sweep=(16,), R=150, suite="normality"))
    assert rep.suite == "normality"
