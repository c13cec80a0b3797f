"""Numerical evaluation of the closed-form coverage and capacity results.

Every coverage expression is assembled from Laplace transforms of aggregate
interference, ``L_I(s) = E[exp(-s I)]``.  For a PPP field the probability
generating functional gives ``L_I(s) = exp(-lambda * J(s))`` where ``J`` is a
one-dimensional integral once the azimuth has been integrated out:

* HAP interferers (Nakagami-m), over the cap ``theta in [0, t]``::

      J(s) = 2 pi  int [1 - (1 + s c G(theta) d(theta)^-alpha_h / m)^-m] b^2 sin(theta) dtheta

  with ``c`` a power ratio and ``G`` an optional antenna gain ratio.  The
  shell version adds a radial average over ``[b - dh, b + dh]``.

* BS interferers (Rayleigh), over the disk ``y in [0, r_b]``::

      J(s) = 2 pi  int  2 sigma^2 c s / (y^alpha_g + 2 sigma^2 c s)  y dy

:class:`LaplaceTerm` holds one such term.  ``J`` is linear in the density,
so terms can be re-evaluated for any density without new quadrature, which
the capacity scans use.
"""

from dataclasses import dataclass, field
import math
from typing import NamedTuple

import numpy as np
from scipy import integrate, optimize

from .antenna import Omnidirectional, gain_ratio_range, mainlobe_edge_polar_angle, offaxis_angle
from .channels import gamma_bound_eta
from .errors import CapabilityError, InfeasibleError, NumericalError

EXACT = "exact"
APPROXIMATE = "approximate"
MONTE_CARLO = "monte_carlo"

_PROB_TOL = 1e-9


@dataclass(frozen=True)
class CoverageResult:
    value: float
    method: str
    abs_error_estimate: float = 0.0
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise NumericalError(f"coverage {self.value} outside [0, 1]")
        if not self.abs_error_estimate >= 0.0:
            raise NumericalError("error estimate must be >= 0")


# -- quadrature --------------------------------------------------------------

def _quad(f, lo, hi, cfg, points=None):
    pts = None
    if points:
        pts = sorted(p for p in set(points) if lo < p < hi) or None
    val, err, info, *msg = integrate.quad(
        f, lo, hi, epsabs=cfg.quad_epsabs, epsrel=cfg.quad_epsrel,
        limit=max(cfg.quad_limit, 2 * len(pts or ()) + 50), points=pts, full_output=1,
    )
    tol = max(cfg.quad_epsabs, cfg.quad_epsrel * abs(val))
    if msg and err > 10.0 * tol:
        raise NumericalError(f"quadrature did not converge: {msg[0]}", residual=err)
    return val, err


def _nakagami_kernel(x, m):
    # 1 - (1 + x/m)^-m, cancellation-free for small x
    return -np.expm1(-m * np.log1p(x / m))


def _nakagami_kernel_ds(u, s, m):
    # d/ds of _nakagami_kernel(s * u, m)
    return u * np.exp(-(m + 1) * np.log1p(s * u / m))


# -- Laplace transforms ------------------------------------------------------

@dataclass(frozen=True)
class LaplaceTerm:
    """Laplace transform of one aggregate-interference term.

    Parameters
    ----------
    cfg : NetworkConfig
    tier : {"hap", "bs"}
        Interfering tier.
    power_ratio : float
        Interferer power over the reference power of the receiver's SINR.
    pattern : antenna pattern or None
        HAP tier only; interferer gains ``pattern.gain(beta)`` enter the
        kernel divided by ``gain_reference``.
    shell : bool
        HAP tier only; use the fluctuating-height shell.
    """

    cfg: object
    tier: str
    power_ratio: float = 1.0
    pattern: object = None
    gain_reference: float = 1.0
    shell: bool = False

    @property
    def density(self):
        return self.cfg.lambda_h if self.tier == "hap" else self.cfg.lambda_g

    def exponent_integral(self, s, order=0):
        """``J(s)`` (order 0) or ``dJ/ds`` (order 1) with its quadrature error."""
        if order not in (0, 1):
            raise CapabilityError("only J and dJ/ds are available")
        if self.tier == "bs":
            return self._disk_integral(s, order)
        if self.shell and self.cfg.delta_h > 0:
            return self._shell_integral(s, order)
        return self._cap_integral(s, order)

    def _gain(self, theta, r):
        if self.pattern is None or not self.pattern.directional:
            return 1.0
        beta = offaxis_angle(theta, self.cfg.a, r)
        return self.pattern.gain(beta) / self.gain_reference

    def _hap_points(self, radii):
        if self.pattern is None:
            return None
        pts = [mainlobe_edge_polar_angle(self.pattern, self.cfg.a, r, self.cfg.t) for r in radii]
        return [p for p in pts if p is not None]

    def _cap_integral(self, s, order):
        cfg = self.cfg
        a, b, m, half = cfg.a, cfg.b, cfg.m, cfg.alpha_h / 2.0
        if s == 0.0 and order == 0:
            return 0.0, 0.0

        def f(theta):
            sh = math.sin(theta / 2.0)
            d2 = (b - a) ** 2 + 4.0 * a * b * sh * sh
            u = self.power_ratio * self._gain(theta, b) * d2 ** -half
            k = _nakagami_kernel(s * u, m) if order == 0 else _nakagami_kernel_ds(u, s, m)
            return b * b * math.sin(theta) * float(k)

        val, err = _quad(f, 0.0, cfg.t, cfg, self._hap_points([b]))
        return 2.0 * math.pi * val, 2.0 * math.pi * err

    def _shell_integral(self, s, order):
        cfg = self.cfg
        a, b, m, half, dh = cfg.a, cfg.b, cfg.m, cfg.alpha_h / 2.0, cfg.delta_h
        if s == 0.0 and order == 0:
            return 0.0, 0.0
        nodes, weights = np.polynomial.legendre.leggauss(cfg.n_radial)
        radii = b + dh * nodes
        # radial mean of r^2 K over [b - dh, b + dh]: (1/2) sum w_i r_i^2 K_i
        rw = 0.5 * weights * radii * radii

        def f(theta):
            sh = math.sin(theta / 2.0)
            d2 = (radii - a) ** 2 + 4.0 * a * radii * sh * sh
            u = self.power_ratio * self._gain(theta, radii) * d2 ** -half
            k = _nakagami_kernel(s * u, m) if order == 0 else _nakagami_kernel_ds(u, s, m)
            return math.sin(theta) * float(np.dot(rw, k))

        val, err = _quad(f, 0.0, cfg.t, cfg, self._hap_points(radii))
        return 2.0 * math.pi * val, 2.0 * math.pi * err

    def _disk_integral(self, s, order):
        cfg = self.cfg
        alpha, rb = cfg.alpha_g, cfg.r_b
        c = 2.0 * cfg.sigma_sq * self.power_ratio
        w = c * s
        if w == 0.0 and order == 0:
            return 0.0, 0.0

        if order == 0:
            def f(y):
                return y * w / (y ** alpha + w)
        else:
            def f(y):
                ya = y ** alpha
                return y * c * ya / (ya + w) ** 2

        knee = w ** (1.0 / alpha) if w > 0 else None
        val, err = _quad(f, 0.0, rb, cfg, [knee] if knee else None)
        return 2.0 * math.pi * val, 2.0 * math.pi * err

    def laplace(self, s, density=None):
        lam = self.density if density is None else density
        if lam == 0.0 or s == 0.0:
            return 1.0
        j, _ = self.exponent_integral(s)
        return math.exp(-lam * j)

    def derivative(self, s, order=1, density=None):
        """``d^k/ds^k L(s)`` for ``k`` in {0, 1}."""
        if order == 0:
            return self.laplace(s, density)
        if order != 1:
            raise CapabilityError(
                f"Laplace derivative of order {order} is not supported; "
                "use the approximate coverage expression for m > 2"
            )
        lam = self.density if density is None else density
        if lam == 0.0:
            return 0.0
        dj, _ = self.exponent_integral(s, order=1)
        return -lam * dj * self.laplace(s, lam)

    def evaluate(self, s, order=0):
        """``(value, abs_error)`` of the transform or its first derivative."""
        lam = self.density
        if lam == 0.0:
            return (1.0 if order == 0 else 0.0), 0.0
        j, ej = self.exponent_integral(s)
        lv = math.exp(-lam * j)
        if order == 0:
            return lv, lv * lam * ej
        dj, edj = self.exponent_integral(s, order=1)
        d = -lam * dj * lv
        return d, abs(d) * (lam * ej) + lv * lam * edj


def _pattern_or_cfg(cfg, pattern):
    return cfg.pattern if pattern is None else pattern


def hap_user_terms(cfg, pattern=None, shell=False):
    """Interference terms seen by the typical HAP user.

    ``pattern=None`` gives omnidirectional HAPs.  Directional HAPs scale
    interferer gains by ``G(beta) / G0`` and BS interference by ``1 / G0``.
    """
    g0 = 1.0 if pattern is None else pattern.peak_gain
    hap = LaplaceTerm(cfg, "hap", 1.0, pattern, g0, shell)
    bs = LaplaceTerm(cfg, "bs", cfg.P_g / (cfg.P_h * g0))
    return hap, bs


def bs_user_terms(cfg, pattern=None):
    """Interference terms seen by the typical BS user (HAP gains unnormalised)."""
    hap = LaplaceTerm(cfg, "hap", cfg.P_h / cfg.P_g, pattern, 1.0)
    bs = LaplaceTerm(cfg, "bs", 1.0)
    return hap, bs


def hap_evaluation_point(cfg, x0=None):
    """``s = m eps x0^alpha_h`` for the exact HAP coverage."""
    x0 = cfg.serving_distance if x0 is None else x0
    return cfg.m * cfg.epsilon * x0 ** cfg.alpha_h


def bs_evaluation_point(cfg):
    """``s = eps y0^alpha_g / (2 sigma^2)`` for the terrestrial coverage."""
    return cfg.epsilon * cfg.y0 ** cfg.alpha_g / (2.0 * cfg.sigma_sq)


def laplace_Ih1(s, cfg):
    return hap_user_terms(cfg)[0].laplace(s)


def laplace_Ig1(s, cfg):
    return hap_user_terms(cfg)[1].laplace(s)


def laplace_Ih1_deriv(s, cfg, order=1):
    return hap_user_terms(cfg)[0].derivative(s, order)


def laplace_Ih1_shell(s, cfg):
    return hap_user_terms(cfg, shell=True)[0].laplace(s)


def laplace_Ih2(s, cfg):
    return bs_user_terms(cfg)[0].laplace(s)


def laplace_Ig2(s, cfg):
    return bs_user_terms(cfg)[1].laplace(s)


def laplace_Ih3(s, cfg, pattern=None):
    return hap_user_terms(cfg, _pattern_or_cfg(cfg, pattern))[0].laplace(s)


def laplace_Ig3(s, cfg, pattern=None):
    return hap_user_terms(cfg, _pattern_or_cfg(cfg, pattern))[1].laplace(s)


def laplace_Ih3_shell(s, cfg, pattern=None):
    return hap_user_terms(cfg, _pattern_or_cfg(cfg, pattern), shell=True)[0].laplace(s)


def laplace_Ih4(s, cfg, pattern=None):
    return bs_user_terms(cfg, _pattern_or_cfg(cfg, pattern))[0].laplace(s)


laplace_Ig4 = laplace_Ig2


# -- coverage assembly -------------------------------------------------------

def _finish(value, err, method, cfg, extra):
    if value < -_PROB_TOL or value > 1.0 + _PROB_TOL:
        raise NumericalError(f"coverage {value!r} outside [0, 1] beyond tolerance", residual=err)
    meta = cfg.metadata()
    meta.update(extra)
    return CoverageResult(min(max(value, 0.0), 1.0), method, float(abs(err)), meta)


def _hap_exact_value(cfg, hap, bs, noise, x0):
    m = cfg.m
    if m > 2:
        raise CapabilityError(
            f"exact HAP coverage needs Laplace derivatives of order {m - 1}; "
            "only m in {1, 2} is supported"
        )
    s = hap_evaluation_point(cfg, x0)
    lh = [hap.evaluate(s, z) for z in range(m)]
    lg = [bs.evaluate(s, z) for z in range(m)]
    total, err = 0.0, 0.0
    for k in range(m):
        for l in range(k + 1):
            for z in range(k - l + 1):
                coef = (s ** k / math.factorial(k) * math.comb(k, l) * noise ** l
                        * (-1) ** (k - l) * math.comb(k - l, z))
                (h, eh), (g, eg) = lh[z], lg[k - l - z]
                total += coef * h * g
                err += abs(coef) * (abs(h) * eg + eh * abs(g))
    pre = math.exp(-s * noise)
    return pre * total, pre * err, [e for _, e in lh + lg]


def _hap_approx_parts(cfg, hap, bs, noise, x0):
    """Per-k pieces of the approximate HAP coverage.

    Returns rows ``(weight, J_hap(s_k), err_J, L_bs(s_k), err_L)`` with
    ``weight = C(m,k) (-1)^(k+1) exp(-s_k noise)``, so the coverage at HAP
    density ``lam`` is ``sum weight * exp(-lam J) * L_bs``.
    """
    m = cfg.m
    _, eta2 = gamma_bound_eta(m)
    x0 = cfg.serving_distance if x0 is None else x0
    rows = []
    for k in range(1, m + 1):
        s = k * eta2 * m * cfg.epsilon * x0 ** cfg.alpha_h
        weight = math.comb(m, k) * (-1) ** (k + 1) * math.exp(-s * noise)
        j, ej = hap.exponent_integral(s)
        lg, elg = bs.evaluate(s)
        rows.append((weight, j, ej, lg, elg))
    return rows


def _approx_from_parts(rows, lam):
    lam = np.asarray(lam, dtype=float)
    val = sum(w * np.exp(-lam * j) * g for w, j, _, g, _ in rows)
    err = sum(abs(w) * np.exp(-lam * j) * (abs(g) * lam * ej + eg) for w, j, ej, g, eg in rows)
    return val, err


def _hap_noise(cfg, pattern):
    g0 = 1.0 if pattern is None else pattern.peak_gain
    return cfg.P_n / (cfg.P_h * g0)


def _antenna_meta(pattern):
    return (pattern or Omnidirectional()).metadata()


def _hap_coverage(cfg, pattern, method, shell=False, x0=None):
    hap, bs = hap_user_terms(cfg, pattern, shell)
    noise = _hap_noise(cfg, pattern)
    if method == EXACT:
        return _hap_exact_value(cfg, hap, bs, noise, x0)
    rows = _hap_approx_parts(cfg, hap, bs, noise, x0)
    val, err = _approx_from_parts(rows, cfg.lambda_h)
    return float(val), float(err), [r[2] for r in rows] + [r[4] for r in rows]


def _exact_or_fallback(cfg, fallback):
    if cfg.m <= 2:
        return EXACT, {}
    if not fallback:
        raise CapabilityError(
            f"exact HAP coverage is limited to m in {{1, 2}} (got m={cfg.m}); "
            "use the approximate expression"
        )
    return APPROXIMATE, {"fallback": f"exact unavailable for m={cfg.m}"}


def coverage_hap_exact(cfg, fallback=False):
    """Exact HAP coverage (integer m in {1, 2}), omnidirectional HAPs.

    With ``fallback=True`` larger ``m`` returns the approximate value tagged
    ``approximate`` instead of raising :class:`CapabilityError`.
    """
    method, extra = _exact_or_fallback(cfg, fallback)
    val, err, res = _hap_coverage(cfg, None, method)
    return _finish(val, err, method, cfg, {**extra, **_antenna_meta(None), "quadrature_residuals": res})


def coverage_hap_approx(cfg):
    """HAP coverage from the incomplete-gamma upper bound, any integer m."""
    val, err, res = _hap_coverage(cfg, None, APPROXIMATE)
    return _finish(val, err, APPROXIMATE, cfg, {**_antenna_meta(None), "quadrature_residuals": res})


def coverage_hap_directional_exact(cfg, pattern=None, fallback=False):
    pattern = _pattern_or_cfg(cfg, pattern)
    method, extra = _exact_or_fallback(cfg, fallback)
    val, err, res = _hap_coverage(cfg, pattern, method)
    return _finish(val, err, method, cfg, {**extra, **_antenna_meta(pattern), "quadrature_residuals": res})


def coverage_hap_directional_approx(cfg, pattern=None):
    pattern = _pattern_or_cfg(cfg, pattern)
    val, err, res = _hap_coverage(cfg, pattern, APPROXIMATE)
    return _finish(val, err, APPROXIMATE, cfg, {**_antenna_meta(pattern), "quadrature_residuals": res})


def _fluct_coverage(cfg, pattern, method):
    if cfg.delta_h == 0.0:
        val, err, res = _hap_coverage(cfg, pattern, method)
        return val, err, res, {"x0_average": "none (delta_h = 0)"}
    nodes, weights = np.polynomial.legendre.leggauss(cfg.n_x0)
    x0c, dh = cfg.serving_distance, cfg.delta_h
    total, err, res = 0.0, 0.0, []
    for xi, wi in zip(nodes, weights):
        v, e, r = _hap_coverage(cfg, pattern, method, shell=True, x0=x0c + dh * xi)
        total += 0.5 * wi * v
        err += 0.5 * wi * e
        res.extend(r)
    meta = {"x0_average": f"uniform on [{x0c - dh:g}, {x0c + dh:g}] m, {cfg.n_x0}-node Gauss-Legendre"}
    return total, err, res, meta


def coverage_hap_fluct(cfg, method=APPROXIMATE):
    """HAP coverage with HAP heights spread over the shell, averaged over the serving distance."""
    if method == EXACT:
        _exact_or_fallback(cfg, False)
    val, err, res, meta = _fluct_coverage(cfg, None, method)
    return _finish(val, err, method, cfg, {**meta, **_antenna_meta(None), "quadrature_residuals": res})


def coverage_hap_directional_fluct(cfg, pattern=None, method=APPROXIMATE):
    pattern = _pattern_or_cfg(cfg, pattern)
    if method == EXACT:
        _exact_or_fallback(cfg, False)
    val, err, res, meta = _fluct_coverage(cfg, pattern, method)
    return _finish(val, err, method, cfg, {**meta, **_antenna_meta(pattern), "quadrature_residuals": res})


def _terrestrial(cfg, pattern):
    hap, bs = bs_user_terms(cfg, pattern)
    s = bs_evaluation_point(cfg)
    lh, eh = hap.evaluate(s)
    lg, eg = bs.evaluate(s)
    pre = math.exp(-s * cfg.P_n / cfg.P_g)
    val = pre * lh * lg
    meta = {**_antenna_meta(pattern), "quadrature_residuals": [eh, eg], "L_hap": lh, "L_bs": lg}
    return _finish(val, pre * (eh * lg + lh * eg), EXACT, cfg, meta)


def coverage_terrestrial(cfg):
    """Coverage of the typical BS user, omnidirectional HAPs."""
    return _terrestrial(cfg, None)


def coverage_terrestrial_directional(cfg, pattern=None):
    """Coverage of the typical BS user when HAPs carry directional antennas."""
    return _terrestrial(cfg, _pattern_or_cfg(cfg, pattern))


# -- capacity and density optimisation ---------------------------------------

def transmission_capacity(cfg, coverage_fn=coverage_hap_approx):
    """``lambda_h * coverage * ln(1 + eps)`` in successful links per m^2 (nats)."""
    if cfg.lambda_h == 0.0:
        return 0.0
    return cfg.lambda_h * coverage_fn(cfg).value * math.log1p(cfg.epsilon)


def capacity_curve(cfg, densities, directional=False):
    """Approximate HAP coverage and capacity over an array of HAP densities.

    Returns ``(coverage, capacity)`` arrays.  Quadrature is done once; the
    density enters only through ``exp(-lambda J)``.
    """
    pattern = cfg.pattern if directional else None
    hap, bs = hap_user_terms(cfg, pattern)
    rows = _hap_approx_parts(cfg, hap, bs, _hap_noise(cfg, pattern), None)
    lam = np.asarray(densities, dtype=float)
    cov, _ = _approx_from_parts(rows, lam)
    if np.any(cov < -_PROB_TOL) or np.any(cov > 1 + _PROB_TOL):
        raise NumericalError("coverage outside [0, 1] beyond tolerance on the density grid")
    cov = np.clip(cov, 0.0, 1.0)
    return cov, lam * cov * math.log1p(cfg.epsilon)


def terrestrial_curve(cfg, densities, directional=False):
    """Terrestrial coverage over an array of HAP densities."""
    hap, bs = bs_user_terms(cfg, cfg.pattern if directional else None)
    s = bs_evaluation_point(cfg)
    j, _ = hap.exponent_integral(s)
    lg = bs.laplace(s)
    lam = np.asarray(densities, dtype=float)
    return math.exp(-s * cfg.P_n / cfg.P_g) * lg * np.exp(-lam * j)


def optimal_density_bounds(cfg, directional=False):
    """Closed-form bracket ``(lower, upper)`` around the capacity-optimal HAP density.

    The interference kernel is bounded by its values at the zenith and at the
    horizon.  For directional HAPs the free gain ratio ``G(beta)/G0`` is
    taken at its largest value for the lower bound and its smallest for the
    upper bound, over the visible off-axis range.
    """
    m, eps, alpha = cfg.m, cfg.epsilon, cfg.alpha_h
    _, eta2 = gamma_bound_eta(m)
    a, b, h = cfg.a, cfg.b, cfg.h
    x0 = cfg.serving_distance
    rmin, rmax = gain_ratio_range(cfg.pattern, a, b) if directional else (1.0, 1.0)
    x_far = math.sqrt(b * b - a * a)
    k_max = 1.0 - (1.0 + m * eta2 * eps * rmax * (x0 / h) ** alpha) ** -m
    k_min = 1.0 - (1.0 + eta2 * eps * rmin * (x0 / x_far) ** alpha) ** -m
    area = 2.0 * math.pi * h * b
    return 1.0 / (area * k_max), 1.0 / (area * k_min)


class OptimalDensity(NamedTuple):
    lambda_h: float
    capacity: float
    constraint_active: bool


DEFAULT_DENSITY_GRID = np.logspace(-13, -7, 200)


def optimal_density_search(cfg, use_constraint=False, directional=False, grid=None):
    """Capacity-maximising HAP density by log-grid scan and golden-section refinement.

    With ``use_constraint`` only densities keeping the terrestrial coverage
    above ``cfg.kappa`` are admissible.
    """
    grid = DEFAULT_DENSITY_GRID if grid is None else np.asarray(grid, dtype=float)
    pattern = cfg.pattern if directional else None
    hap, bs = hap_user_terms(cfg, pattern)
    rows = _hap_approx_parts(cfg, hap, bs, _hap_noise(cfg, pattern), None)
    log1pe = math.log1p(cfg.epsilon)

    def capacity(lam):
        return float(lam * _approx_from_parts(rows, lam)[0] * log1pe)

    tc = np.array([capacity(l) for l in grid])
    i = int(np.argmax(tc))
    if 0 < i < len(grid) - 1:
        res = optimize.minimize_scalar(
            lambda x: -capacity(10.0 ** x), method="golden",
            bracket=(math.log10(grid[i - 1]), math.log10(grid[i]), math.log10(grid[i + 1])),
            tol=1e-10,
        )
        best = 10.0 ** res.x
    else:
        best = float(grid[i])
    best_tc = capacity(best)
    if not use_constraint:
        return OptimalDensity(best, best_tc, False)

    def terr(lam):
        return float(terrestrial_curve(cfg, [lam], directional)[0])

    feasible = terrestrial_curve(cfg, grid, directional) > cfg.kappa
    if not feasible.any():
        raise InfeasibleError(f"terrestrial coverage <= kappa={cfg.kappa} on the whole density grid")
    if terr(best) > cfg.kappa:
        return OptimalDensity(best, best_tc, False)
    # terrestrial coverage decreases in the HAP density, so the feasible set is
    # an interval starting at the smallest density; the optimum sits on its edge
    last = int(np.nonzero(feasible)[0].max())
    lo = float(grid[last])
    hi = float(grid[last + 1]) if last + 1 < len(grid) else lo
    edge = optimize.brentq(lambda l: terr(l) - cfg.kappa, lo, hi, xtol=1e-30, rtol=1e-14) if hi > lo else lo
    # brentq may land on the infeasible side of the root
    while terr(edge) <= cfg.kappa and edge > lo:
        edge = max(lo, edge * (1.0 - 1e-12))
    edge = min(edge, best)
    return OptimalDensity(edge, capacity(edge), True)
