import math

import numpy as np
import pytest

from hapnet import analytic as an
from hapnet.antenna import Omnidirectional
from hapnet.config import NetworkConfig
from hapnet.errors import CapabilityError, InfeasibleError


def cap_J_closed_form(cfg, s, m):
    """Cap exponent integral for alpha_h = 2 via the substitution u = d^2."""
    a, b = cfg.a, cfg.b
    u0, u1 = (b - a) ** 2, b * b - a * a
    if m == 1:
        inner = s * math.log((u1 + s) / (u0 + s))
    else:  # m == 2: 1 - (u / (u + c))^2 with c = s / 2
        c = s / 2.0
        prim = lambda u: 2 * c * math.log(u + c) + c * c / (u + c)
        inner = prim(u1) - prim(u0)
    return math.pi * b / a * inner


@pytest.mark.parametrize("m", [1, 2])
@pytest.mark.parametrize("s", [1e6, 8e7, 3e9])
def test_cap_integral_closed_form(m, s):
    cfg = NetworkConfig(m=m)
    hap, _ = an.hap_user_terms(cfg)
    j, err = hap.exponent_integral(s)
    assert j == pytest.approx(cap_J_closed_form(cfg, s, m), rel=1e-8)
    assert err >= 0


@pytest.mark.parametrize("w", [1e-3, 1.0, 625000.0, 1e9])
def test_disk_integral_closed_form(w):
    # alpha_g = 4: 2 pi int y w / (y^4 + w) dy = pi sqrt(w) arctan(r_b^2 / sqrt(w))
    cfg = NetworkConfig(sigma_sq=0.5)
    _, bs = an.bs_user_terms(cfg)
    j, _ = bs.exponent_integral(w)  # 2 sigma^2 = 1, ratio 1
    assert j == pytest.approx(math.pi * math.sqrt(w) * math.atan(cfg.r_b ** 2 / math.sqrt(w)), rel=1e-8)


def test_sigma_factor_in_bs_kernel():
    cfg = NetworkConfig(sigma_sq=2.0)
    _, bs = an.bs_user_terms(cfg)
    w = 4.0 * 1e5
    ref = math.pi * math.sqrt(w) * math.atan(cfg.r_b ** 2 / math.sqrt(w))
    assert bs.exponent_integral(1e5)[0] == pytest.approx(ref, rel=1e-8)


def test_laplace_frozen_values(cfg):
    s, sb = an.hap_evaluation_point(cfg), an.bs_evaluation_point(cfg)
    assert (s, sb) == (8e7, 625000.0)
    assert an.laplace_Ih1(s, cfg) == pytest.approx(0.8527522165748038, rel=1e-7)
    assert an.laplace_Ig1(s, cfg) == pytest.approx(0.43281991219357213, rel=1e-7)
    assert an.laplace_Ih2(sb, cfg) == pytest.approx(0.9968262269562104, rel=1e-7)
    assert an.laplace_Ig2(sb, cfg) == pytest.approx(0.8895509255585614, rel=1e-7)
    assert an.laplace_Ih3(s, cfg) == pytest.approx(0.9938177236757436, rel=1e-7)
    assert an.laplace_Ih4(sb, cfg) == pytest.approx(0.999403702900927, rel=1e-7)
    assert an.laplace_Ig4(sb, cfg) == an.laplace_Ig2(sb, cfg)


def test_laplace_trivial_limits(cfg):
    assert an.laplace_Ih1(0.0, cfg) == 1.0
    assert an.laplace_Ih1(8e7, cfg.replace(lambda_h=0.0)) == 1.0
    vals = [an.laplace_Ih1(s, cfg) for s in (1e6, 1e7, 1e8, 1e9)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("s", [1e7, 8e7, 5e8])
def test_derivative_matches_finite_difference(cfg, s):
    d = an.laplace_Ih1_deriv(s, cfg)
    h = s * 1e-4
    fd = (an.laplace_Ih1(s + h, cfg) - an.laplace_Ih1(s - h, cfg)) / (2 * h)
    assert abs(d - fd) / abs(d) < 1e-5


def test_derivative_order_limits(cfg):
    assert an.laplace_Ih1_deriv(8e7, cfg, order=0) == an.laplace_Ih1(8e7, cfg)
    with pytest.raises(CapabilityError):
        an.laplace_Ih1_deriv(8e7, cfg, order=2)


def test_frozen_coverage(cfg):
    assert an.coverage_hap_exact(cfg).value == pytest.approx(0.5808488079161981, abs=1e-8)
    assert an.coverage_hap_approx(cfg).value == pytest.approx(0.5872531022495191, abs=1e-8)
    assert an.coverage_hap_directional_exact(cfg).value == pytest.approx(0.8102702655895627, abs=1e-8)
    assert an.coverage_hap_directional_approx(cfg).value == pytest.approx(0.8130792556640822, abs=1e-8)
    assert an.coverage_terrestrial(cfg).value == pytest.approx(0.8866999830025132, abs=1e-8)
    assert an.coverage_terrestrial_directional(cfg).value == pytest.approx(0.8889927074659818, abs=1e-8)


def test_exact_m1_is_closed_form(cfg):
    c = cfg.replace(m=1)
    s = an.hap_evaluation_point(c)
    ref = math.exp(-s * c.P_n / c.P_h) * an.laplace_Ih1(s, c) * an.laplace_Ig1(s, c)
    assert an.coverage_hap_exact(c).value == pytest.approx(ref, abs=1e-12)


def test_exact_m2_against_numeric_derivative(cfg):
    # P = F(s) - s F'(s) with F = exp(-s N) L_h L_g, F' by central differences
    s = an.hap_evaluation_point(cfg)
    noise = cfg.P_n / cfg.P_h

    def F(x):
        return math.exp(-x * noise) * an.laplace_Ih1(x, cfg) * an.laplace_Ig1(x, cfg)

    h = s * 1e-4
    ref = F(s) - s * (F(s + h) - F(s - h)) / (2 * h)
    assert an.coverage_hap_exact(cfg).value == pytest.approx(ref, abs=1e-7)


def test_approx_upper_bounds_exact(cfg):
    for h in (20e3, 35e3, 50e3):
        c = cfg.replace(h=h)
        assert an.coverage_hap_approx(c).value >= an.coverage_hap_exact(c).value


def test_exact_capability(cfg):
    c = cfg.replace(m=3)
    with pytest.raises(CapabilityError):
        an.coverage_hap_exact(c)
    res = an.coverage_hap_exact(c, fallback=True)
    assert res.method == an.APPROXIMATE and "fallback" in res.metadata
    assert res.value == an.coverage_hap_approx(c).value


def test_result_metadata(cfg):
    res = an.coverage_hap_directional_approx(cfg)
    assert res.metadata["config_hash"] == cfg.config_hash()
    assert res.metadata["mainlobe_exponent"] == 2
    assert len(res.metadata["quadrature_residuals"]) == 2 * cfg.m


def test_unit_gain_pattern_reduces_to_omni(cfg):
    o = Omnidirectional()
    assert an.coverage_hap_directional_approx(cfg, o).value == pytest.approx(an.coverage_hap_approx(cfg).value, abs=1e-12)
    assert an.coverage_terrestrial_directional(cfg, o).value == pytest.approx(an.coverage_terrestrial(cfg).value, abs=1e-12)


def test_fluct_thin_shell_matches_cap(cfg):
    c = cfg.replace(delta_h=1.0)
    assert an.coverage_hap_fluct(c).value == pytest.approx(an.coverage_hap_approx(cfg).value, abs=1e-6)
    assert an.coverage_hap_fluct(cfg).value == an.coverage_hap_approx(cfg).value


def test_fluct_exact_m2(cfg):
    c = cfg.replace(delta_h=2e3)
    ex = an.coverage_hap_fluct(c, an.EXACT).value
    ap = an.coverage_hap_fluct(c).value
    assert ex <= ap and ap - ex < 0.02


def test_monotone_in_height_and_epsilon(cfg):
    vals = [an.coverage_hap_approx(cfg.replace(h=h)).value for h in (20e3, 30e3, 40e3, 50e3)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    vals = [an.coverage_hap_approx(cfg.replace(epsilon=e)).value for e in (0.05, 0.1, 0.3, 1.0)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_capacity_curve_consistent(cfg):
    lam = np.array([1e-11, 1e-10, 1e-9])
    cov, cap = an.capacity_curve(cfg, lam)
    for l, c in zip(lam, cov):
        assert c == pytest.approx(an.coverage_hap_approx(cfg.replace(lambda_h=l)).value, abs=1e-10)
    np.testing.assert_allclose(cap, lam * cov * math.log(1.1))
    assert an.transmission_capacity(cfg) == pytest.approx(cap[1], rel=1e-10)
    tc = an.terrestrial_curve(cfg, lam)
    assert tc[1] == pytest.approx(an.coverage_terrestrial(cfg).value, abs=1e-10)


def test_optimal_density(cfg):
    opt = an.optimal_density_search(cfg)
    lo, hi = an.optimal_density_bounds(cfg)
    assert lo < opt.lambda_h < hi
    assert opt.lambda_h == pytest.approx(1.019268031165655e-09, rel=1e-4)
    assert not opt.constraint_active
    tight = an.optimal_density_search(cfg.replace(kappa=0.885), use_constraint=True)
    assert tight.constraint_active and tight.lambda_h < opt.lambda_h
    assert an.coverage_terrestrial(cfg.replace(lambda_h=tight.lambda_h)).value >= 0.885 - 1e-9
    with pytest.raises(InfeasibleError):
        an.optimal_density_search(cfg.replace(kappa=0.9), use_constraint=True)
