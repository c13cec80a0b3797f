"""Monte Carlo estimation of coverage, independent of the analytic module.

One *trial* realises both networks around the typical users at ``(0, 0, a)``:

1. the interfering HAP field (cap, shell, or flat plane baseline),
2. two independent Nakagami fading sets for the HAP links, one towards the
   HAP user and one towards the BS user,
3. the interfering BS field on the disk of radius ``r_b``,
4. two independent Rayleigh fading sets for the BS links,
5. the serving-link fading ``h0`` (Nakagami) and ``g0`` (Rayleigh), and
6. one uniform that places the serving HAP radially under fluctuation.

The serving HAP sits at the user's zenith at distance ``x0`` and the serving
BS at distance ``y0``; neither is part of any interference sum.  Every trial
draws from its own counter-based stream, so all scenarios evaluated with the
same seed share their random numbers, and results do not depend on threading.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math
import os

import numpy as np

from . import kernels
from .antenna import Omnidirectional
from .channels import sample_nakagami_power, sample_rayleigh_power
from .errors import CapabilityError, DomainError
from .geometry import cap_polar_draw, hap_link_geometry, sample_disk_radii, sample_ppp_in_shell
from .rng import LAPLACE, TRIAL, stream

SCENARIOS = (
    "hap_omni", "hap_dir", "bs_omni", "bs_dir",
    "hap_fluct_omni", "hap_fluct_dir", "hap_plane_baseline",
)

_SCENARIO_GEOMETRY = {
    "hap_omni": "cap", "hap_dir": "cap", "bs_omni": "cap", "bs_dir": "cap",
    "hap_fluct_omni": "shell", "hap_fluct_dir": "shell", "hap_plane_baseline": "plane",
}

_Z95 = 1.959963984540054
_CHUNK = 256
THREADS_ENV = "HAPNET_THREADS"


@dataclass(frozen=True)
class TrialOutcome:
    sinr_hap_user: float
    sinr_bs_user: float
    counts: dict


@dataclass(frozen=True)
class CoverageEstimate:
    p_hat: float
    ci95_halfwidth: float
    n_trials: int
    seed: int
    ci_method: str = "normal"
    metadata: dict = field(default_factory=dict)

    @classmethod
    def from_successes(cls, successes, n_trials, seed, metadata=None):
        """Binomial estimate; Wilson interval when ``n p (1 - p) < 10``."""
        if n_trials < 1:
            raise DomainError("n_trials must be >= 1")
        p = successes / n_trials
        if n_trials * p * (1.0 - p) >= 10.0:
            half, method = _Z95 * math.sqrt(p * (1.0 - p) / n_trials), "normal"
        else:
            z2n = _Z95 * _Z95 / n_trials
            half = _Z95 * math.sqrt(p * (1 - p) / n_trials + z2n / (4 * n_trials)) / (1 + z2n)
            method = "wilson"
        return cls(p, half, n_trials, seed, method, dict(metadata or {}))


def resolve_threads(threads=None):
    """Thread count from the argument, else ``HAPNET_THREADS``, else the CPU count."""
    if threads in (None, "auto"):
        env = os.environ.get(THREADS_ENV, "").strip()
        threads = int(env) if env else (os.cpu_count() or 1)
    threads = int(threads)
    if threads < 1:
        raise DomainError("threads must be >= 1")
    return threads


def plane_truncation_radius(cfg, tail_fraction=1e-3):
    """Radius of the plane-baseline HAP disk and whether the mean interference diverges.

    For ``alpha_h > 2`` the mean interference from beyond radius ``R`` of a
    plane at height ``h`` is ``((R^2 + h^2) / h^2)^(1 - alpha_h/2)`` of the
    total, so ``R`` is chosen to make that fraction ``tail_fraction``.  For
    ``alpha_h <= 2`` the mean diverges and ``cfg.plane_radius`` (default ``a``)
    is used.
    """
    if cfg.alpha_h > 2.0:
        expo = 2.0 / (cfg.alpha_h - 2.0)
        return cfg.h * math.sqrt(tail_fraction ** -expo - 1.0), False
    return (cfg.a if cfg.plane_radius is None else cfg.plane_radius), True


# -- one realisation ---------------------------------------------------------

_COMPONENTS = (
    "hap_to_hap_user", "hap_to_hap_user_dir", "hap_to_bs_user", "hap_to_bs_user_dir",
    "bs_to_hap_user", "bs_to_bs_user", "h0", "g0", "x0", "n_haps", "n_bss",
)


def _hap_field(cfg, geometry, rng):
    """Squared distances and off-axis cosines of the interfering HAPs."""
    if geometry == "cap":
        theta, _ = cap_polar_draw(cfg.cap, cfg.lambda_h, rng, cfg.n_intervals)
        return hap_link_geometry(cfg.b, theta, cfg.a)
    if geometry == "shell":
        ps = sample_ppp_in_shell(cfg.shell, cfg.lambda_h, rng, cfg.n_intervals)
        return hap_link_geometry(ps.params[:, 0], ps.params[:, 1], cfg.a)
    if geometry == "plane":
        radius, _ = plane_truncation_radius(cfg)
        rho = sample_disk_radii(cfg.lambda_h, radius, rng)
        d2 = rho * rho + cfg.h * cfg.h
        return d2, cfg.h / np.sqrt(d2)
    raise CapabilityError(f"unknown HAP geometry {geometry!r}")


def _realize(cfg, geometry, rng, pattern):
    d2, cos_beta = _hap_field(cfg, geometry, rng)
    n_h = d2.size
    fh1 = sample_nakagami_power(cfg.m, rng, n_h)
    fh2 = sample_nakagami_power(cfg.m, rng, n_h)
    rho = sample_disk_radii(cfg.lambda_g, cfg.r_b, rng)
    n_g = rho.size
    fg1 = sample_rayleigh_power(cfg.sigma_sq, rng, n_g)
    fg2 = sample_rayleigh_power(cfg.sigma_sq, rng, n_g)
    h0 = sample_nakagami_power(cfg.m, rng)
    g0 = float(sample_rayleigh_power(cfg.sigma_sq, rng))
    u = rng.random()
    x0 = cfg.serving_distance
    if geometry == "shell":
        x0 += cfg.delta_h * (2.0 * u - 1.0)
    if pattern.directional:
        hs = kernels.hap_sums(
            d2, cos_beta, fh1, fh2, cfg.alpha_h / 2.0, True,
            pattern.g0_db, pattern.theta_3db, pattern.mainlobe_exponent, pattern.gsl_db,
        )
    else:
        hs = kernels.hap_sums(d2, cos_beta, fh1, fh2, cfg.alpha_h / 2.0)
    bs = kernels.bs_sums(rho, fg1, fg2, cfg.alpha_g / 2.0)
    return (*hs, *bs, h0, g0, x0, n_h, n_g)


def sample_components(cfg, n_trials, seed, geometry="cap", threads=None, tag=TRIAL):
    """Raw per-trial interference sums, fading and counts.

    Returns a dict of arrays keyed by component name: interference sums
    without transmit powers (``hap_to_hap_user`` is ``sum h_i x_i^-alpha_h``,
    ``*_dir`` variants include the linear antenna gain ``G(beta_i)``),
    serving fading ``h0``/``g0``, serving distance ``x0`` and field counts.
    """
    if n_trials < 1:
        raise DomainError("n_trials must be >= 1")
    pattern = cfg.pattern

    def run(bounds):
        lo, hi = bounds
        return [_realize(cfg, geometry, stream(seed, i, tag), pattern) for i in range(lo, hi)]

    chunks = [(lo, min(lo + _CHUNK, n_trials)) for lo in range(0, n_trials, _CHUNK)]
    nthreads = min(resolve_threads(threads), len(chunks))
    if nthreads > 1:
        with ThreadPoolExecutor(nthreads) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(c) for c in chunks]
    rows = np.array([r for part in parts for r in part], dtype=float)
    out = {name: rows[:, k] for k, name in enumerate(_COMPONENTS)}
    out["n_haps"] = out["n_haps"].astype(np.int64)
    out["n_bss"] = out["n_bss"].astype(np.int64)
    return out


def sinr_from_components(cfg, comp, receiver, directional):
    """SINR arrays at the HAP user (``receiver="hap"``) or the BS user."""
    pattern = cfg.pattern if directional else Omnidirectional()
    if receiver == "hap":
        sig = cfg.P_h * pattern.peak_gain * comp["x0"] ** -cfg.alpha_h * comp["h0"]
        ih = comp["hap_to_hap_user_dir" if directional else "hap_to_hap_user"]
        return sig / (cfg.P_n + cfg.P_h * ih + cfg.P_g * comp["bs_to_hap_user"])
    if receiver == "bs":
        sig = cfg.P_g * cfg.y0 ** -cfg.alpha_g * comp["g0"]
        ih = comp["hap_to_bs_user_dir" if directional else "hap_to_bs_user"]
        return sig / (cfg.P_n + cfg.P_h * ih + cfg.P_g * comp["bs_to_bs_user"])
    raise DomainError(f"unknown receiver {receiver!r}")


def _scenario_view(scenario):
    if scenario not in SCENARIOS:
        raise CapabilityError(f"unsupported scenario {scenario!r}; choose from {SCENARIOS}")
    receiver = "bs" if scenario.startswith("bs_") else "hap"
    return _SCENARIO_GEOMETRY[scenario], receiver, scenario.endswith("_dir")


def run_trial(cfg, scenario, rng):
    """One realisation of ``scenario`` drawn from ``rng``; returns both users' SINRs."""
    geometry, _, directional = _scenario_view(scenario)
    pattern = cfg.pattern
    row = dict(zip(_COMPONENTS, _realize(cfg, geometry, rng, pattern)))
    comp = {k: np.array([v]) for k, v in row.items()}
    return TrialOutcome(
        float(sinr_from_components(cfg, comp, "hap", directional)[0]),
        float(sinr_from_components(cfg, comp, "bs", directional)[0]),
        {"n_haps": int(row["n_haps"]), "n_bss": int(row["n_bss"])},
    )


def _estimate_meta(cfg, scenario):
    geometry, receiver, directional = _scenario_view(scenario)
    meta = {"scenario": scenario, "config_hash": cfg.config_hash(), "kernel_backend": kernels.BACKEND}
    if geometry == "plane":
        radius, divergent = plane_truncation_radius(cfg)
        meta.update(plane_radius_m=radius, plane_mean_interference_divergent=divergent)
    return meta


def estimate_coverage(cfg, scenario, epsilon=None, n_trials=10_000, seed=0, threads=None):
    """Fraction of trials with SINR above ``epsilon`` (default ``cfg.epsilon``)."""
    geometry, receiver, directional = _scenario_view(scenario)
    eps = cfg.epsilon if epsilon is None else epsilon
    comp = sample_components(cfg, n_trials, seed, geometry, threads)
    sinr = sinr_from_components(cfg, comp, receiver, directional)
    return CoverageEstimate.from_successes(
        int(np.count_nonzero(sinr > eps)), n_trials, seed, _estimate_meta(cfg, scenario)
    )


def estimate_all(cfg, n_trials=10_000, seed=0, geometry="cap", threads=None):
    """Estimates for every scenario sharing ``geometry``, from one set of trials."""
    comp = sample_components(cfg, n_trials, seed, geometry, threads)
    out = {}
    for scenario in SCENARIOS:
        geo, receiver, directional = _scenario_view(scenario)
        if geo != geometry:
            continue
        sinr = sinr_from_components(cfg, comp, receiver, directional)
        out[scenario] = CoverageEstimate.from_successes(
            int(np.count_nonzero(sinr > cfg.epsilon)), n_trials, seed, _estimate_meta(cfg, scenario)
        )
    return out


SWEEP_AXES = {
    "height": "h", "density": "lambda_h", "epsilon": "epsilon",
    "delta_h": "delta_h", "theta_3db": "theta_3db",
}


@dataclass(frozen=True)
class SweepRow:
    axis: str
    value: float
    estimate: CoverageEstimate
    config_hash: str


def sweep(cfg, scenario, axis, grid, n_trials=10_000, seed=0, threads=None):
    """One estimate per grid value; every point reuses ``seed`` (common random numbers)."""
    if axis not in SWEEP_AXES:
        raise DomainError(f"unknown sweep axis {axis!r}; choose from {tuple(SWEEP_AXES)}")
    grid = [float(v) for v in grid]
    if not grid:
        raise DomainError("sweep grid is empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise DomainError("sweep grid must be strictly ascending")
    key = SWEEP_AXES[axis]
    geometry, receiver, directional = _scenario_view(scenario)
    rows = []
    if axis == "epsilon":
        comp = sample_components(cfg, n_trials, seed, geometry, threads)
        sinr = sinr_from_components(cfg, comp, receiver, directional)
        for v in grid:
            c = cfg.replace(epsilon=v)
            est = CoverageEstimate.from_successes(
                int(np.count_nonzero(sinr > v)), n_trials, seed, _estimate_meta(c, scenario)
            )
            rows.append(SweepRow(axis, v, est, c.config_hash()))
        return rows
    for v in grid:
        c = cfg.replace(**{key: v})
        est = estimate_coverage(c, scenario, None, n_trials, seed, threads)
        rows.append(SweepRow(axis, v, est, c.config_hash()))
    return rows


# -- Laplace-functional oracle -----------------------------------------------

def interference_samples(cfg, comp, directional=False, shell=False):
    """Per-realisation aggregate interference in the normalisations of the analytic terms.

    Keys: ``Ih1, Ig1, Ih2, Ig2`` (omnidirectional) or ``Ih3, Ig3, Ih4, Ig4``.
    """
    g0 = cfg.pattern.peak_gain
    if not directional:
        return {
            "Ih1": comp["hap_to_hap_user"],
            "Ig1": comp["bs_to_hap_user"] * cfg.P_g / cfg.P_h,
            "Ih2": comp["hap_to_bs_user"] * cfg.P_h / cfg.P_g,
            "Ig2": comp["bs_to_bs_user"],
        }
    return {
        "Ih3": comp["hap_to_hap_user_dir"] / g0,
        "Ig3": comp["bs_to_hap_user"] * cfg.P_g / (cfg.P_h * g0),
        "Ih4": comp["hap_to_bs_user_dir"] * cfg.P_h / cfg.P_g,
        "Ig4": comp["bs_to_bs_user"],
    }


@dataclass(frozen=True)
class LaplaceEstimate:
    value: float
    std_error: float
    n: int


def laplace_oracle(cfg, points, n_realizations=100_000, seed=0, geometry="cap", threads=None):
    """Empirical ``E[exp(-s I)]`` for each ``name -> s`` in ``points``.

    Names are the keys of :func:`interference_samples`.
    """
    comp = sample_components(cfg, n_realizations, seed, geometry, threads, tag=LAPLACE)
    samples = {**interference_samples(cfg, comp, False), **interference_samples(cfg, comp, True)}
    out = {}
    for name, s in points.items():
        v = np.exp(-s * samples[name])
        out[name] = LaplaceEstimate(float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size)), v.size)
    return out
