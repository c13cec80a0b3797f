import math

import numpy as np
import pytest

from hapnet import analytic as an
from hapnet import montecarlo as mc
from hapnet.channels import nakagami_power_ccdf
from hapnet.config import NetworkConfig
from hapnet.errors import CapabilityError, DomainError
from hapnet.rng import stream


@pytest.fixture
def small():
    # fewer BSs so that trials are cheap
    return NetworkConfig(r_b=2e3)


def test_no_interference_trial(small):
    c = small.replace(lambda_h=0.0, lambda_g=0.0)
    out = mc.run_trial(c, "hap_omni", stream(1, 0))
    assert out.counts == {"n_haps": 0, "n_bss": 0}
    comp = mc.sample_components(c, 50, seed=1)
    for key in ("hap_to_hap_user", "hap_to_bs_user", "bs_to_hap_user", "bs_to_bs_user"):
        assert np.all(comp[key] == 0.0)
    sinr = mc.sinr_from_components(c, comp, "hap", False)
    np.testing.assert_allclose(sinr, c.P_h * c.h ** -c.alpha_h * comp["h0"] / c.P_n, rtol=1e-15)
    assert out.sinr_hap_user == pytest.approx(float(sinr[0]), rel=1e-15)


def test_noise_limited_coverage_matches_ccdf(small):
    c = small.replace(lambda_h=0.0, lambda_g=0.0, epsilon=5e4)
    est = mc.estimate_coverage(c, "hap_omni", n_trials=4000, seed=2)
    ref = nakagami_power_ccdf(c.epsilon * c.P_n * c.h ** 2 / c.P_h, c.m)
    assert abs(est.p_hat - ref) <= 3 * est.ci95_halfwidth


def test_pure_terrestrial(small):
    c = small.replace(lambda_h=0.0)
    est = mc.estimate_coverage(c, "bs_omni", n_trials=4000, seed=3)
    ref = an.coverage_terrestrial(c).value
    assert abs(est.p_hat - ref) <= max(0.02, 3 * est.ci95_halfwidth)


def test_mean_counts(small):
    comp = mc.sample_components(small, 2000, seed=4)
    assert comp["n_haps"].mean() == pytest.approx(small.lambda_h * small.cap.area(), rel=0.02)
    assert comp["n_bss"].mean() == pytest.approx(small.lambda_g * math.pi * small.r_b ** 2, rel=0.02)


def test_shell_counts_and_serving_distance(small):
    c = small.replace(delta_h=4e3)
    comp = mc.sample_components(c, 2000, seed=5, geometry="shell")
    assert comp["n_haps"].mean() == pytest.approx(c.shell.expected_count(c.lambda_h), rel=0.02)
    assert comp["x0"].min() >= c.h - 4e3 and comp["x0"].max() <= c.h + 4e3
    assert comp["x0"].std() == pytest.approx(2 * 4e3 / math.sqrt(12), rel=0.05)


def test_determinism_and_threads(small):
    a = mc.sample_components(small, 600, seed=7, threads=1)
    b = mc.sample_components(small, 600, seed=7, threads=3)
    for k in a:
        np.testing.assert_array_equal(a[k], b[k])
    c = mc.sample_components(small, 600, seed=8, threads=1)
    assert not np.array_equal(a["hap_to_hap_user"], c["hap_to_hap_user"])
    e1 = mc.estimate_coverage(small, "hap_dir", n_trials=300, seed=7)
    e2 = mc.estimate_coverage(small, "hap_dir", n_trials=300, seed=7)
    assert e1 == e2


def test_trial_prefix_stable(small):
    # trial i depends only on (seed, i)
    a = mc.sample_components(small, 300, seed=9)
    b = mc.sample_components(small, 100, seed=9)
    np.testing.assert_array_equal(a["bs_to_bs_user"][:100], b["bs_to_bs_user"])


def test_threads_env(monkeypatch):
    monkeypatch.setenv(mc.THREADS_ENV, "3")
    assert mc.resolve_threads(None) == 3
    assert mc.resolve_threads(2) == 2
    with pytest.raises(DomainError):
        mc.resolve_threads(0)


def test_epsilon_to_zero(small):
    assert mc.estimate_coverage(small, "hap_omni", epsilon=1e-15, n_trials=200, seed=1).p_hat == 1.0


def test_unsupported_scenario(small):
    with pytest.raises(CapabilityError):
        mc.estimate_coverage(small, "uplink", n_trials=10)
    with pytest.raises(CapabilityError):
        mc.run_trial(small, "uplink", stream(0))


def test_ci_methods():
    est = mc.CoverageEstimate.from_successes(500, 1000, 0)
    assert est.ci_method == "normal"
    assert est.ci95_halfwidth == pytest.approx(1.96 * math.sqrt(0.25 / 1000), rel=1e-3)
    w = mc.CoverageEstimate.from_successes(1000, 1000, 0)
    assert w.ci_method == "wilson" and w.p_hat == 1.0 and 0 < w.ci95_halfwidth < 0.005
    with pytest.raises(DomainError):
        mc.CoverageEstimate.from_successes(0, 0, 0)


def test_halfwidth_scaling():
    # cheap field: a few HAPs and BSs per trial
    c = NetworkConfig(r_b=300.0, n_intervals=8)
    widths = [mc.estimate_coverage(c, "hap_omni", n_trials=n, seed=1).ci95_halfwidth
              for n in (1_000, 10_000, 100_000)]
    ratios = [widths[0] / widths[1], widths[1] / widths[2]]
    for r in ratios:
        assert r == pytest.approx(math.sqrt(10), rel=0.1)


def test_sweep_epsilon_is_monotone(small):
    rows = mc.sweep(small, "hap_omni", "epsilon", [0.01, 0.1, 1.0, 10.0], n_trials=500, seed=2)
    p = [r.estimate.p_hat for r in rows]
    assert all(b <= a for a, b in zip(p, p[1:]))
    assert rows[1].config_hash == small.replace(epsilon=0.1).config_hash()


def test_sweep_height_decreasing(small):
    rows = mc.sweep(small, "hap_omni", "height", [20e3, 35e3, 50e3], n_trials=2000, seed=3)
    p = [r.estimate.p_hat for r in rows]
    assert p[0] > p[1] > p[2]


def test_sweep_validation(small):
    with pytest.raises(DomainError):
        mc.sweep(small, "hap_omni", "height", [30e3, 20e3], n_trials=10)
    with pytest.raises(DomainError):
        mc.sweep(small, "hap_omni", "height", [], n_trials=10)
    with pytest.raises(DomainError):
        mc.sweep(small, "hap_omni", "power", [1.0], n_trials=10)


def test_plane_truncation():
    c = NetworkConfig(alpha_h=3.0)
    r, divergent = mc.plane_truncation_radius(c)
    assert not divergent
    assert ((r * r + c.h ** 2) / c.h ** 2) ** (1 - c.alpha_h / 2) == pytest.approx(1e-3, rel=1e-9)
    r, divergent = mc.plane_truncation_radius(NetworkConfig())
    assert divergent and r == NetworkConfig().a
    est = mc.estimate_coverage(NetworkConfig(plane_radius=200e3), "hap_plane_baseline", n_trials=50, seed=0)
    assert est.metadata["plane_radius_m"] == 200e3


def test_laplace_oracle_small(small):
    points = {"Ih1": an.hap_evaluation_point(small), "Ig2": an.bs_evaluation_point(small)}
    got = mc.laplace_oracle(small, points, n_realizations=3000, seed=1)
    ref = {"Ih1": an.laplace_Ih1(points["Ih1"], small), "Ig2": an.laplace_Ig2(points["Ig2"], small)}
    for k in points:
        assert abs(got[k].value - ref[k]) <= 4 * got[k].std_error + 1e-3


def test_estimate_all_matches_single(small):
    allv = mc.estimate_all(small, n_trials=300, seed=6)
    assert set(allv) == {"hap_omni", "hap_dir", "bs_omni", "bs_dir"}
    one = mc.estimate_coverage(small, "bs_dir", n_trials=300, seed=6)
    assert allv["bs_dir"].p_hat == one.p_hat
