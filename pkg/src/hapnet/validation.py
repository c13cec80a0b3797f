"""Analytic-versus-Monte-Carlo cross-checks for a single configuration."""

from dataclasses import dataclass

from . import analytic, montecarlo
from .errors import CapabilityError

ANALYTIC_REFERENCE = {
    "hap_omni": lambda cfg: analytic.coverage_hap_approx(cfg),
    "hap_dir": lambda cfg: analytic.coverage_hap_directional_approx(cfg),
    "bs_omni": lambda cfg: analytic.coverage_terrestrial(cfg),
    "bs_dir": lambda cfg: analytic.coverage_terrestrial_directional(cfg),
    "hap_fluct_omni": lambda cfg: analytic.coverage_hap_fluct(cfg),
    "hap_fluct_dir": lambda cfg: analytic.coverage_hap_directional_fluct(cfg),
}


@dataclass(frozen=True)
class CheckResult:
    name: str
    measured: float
    reference: float
    tolerance: float
    passed: bool
    detail: str = ""


def agreement_tolerance(estimate, floor=0.02):
    """``max(floor, 3 * CI95 halfwidth)``."""
    return max(floor, 3.0 * estimate.ci95_halfwidth)


def _scenarios(selection):
    if selection in (None, "all"):
        return list(montecarlo.SCENARIOS)
    names = [s.strip() for s in selection.split(",")] if isinstance(selection, str) else list(selection)
    for s in names:
        if s not in montecarlo.SCENARIOS:
            raise CapabilityError(f"unsupported scenario {s!r}")
    return names


def run_validation(cfg, scenarios="all", n_trials=10_000, seed=0, threads=None):
    """Compare Monte Carlo estimates with the analytic values.

    Each analytic scenario passes when ``|analytic - MC| <= max(0.02, 3 CI)``.
    The plane baseline passes when its coverage does not exceed the
    spherical-cap coverage by more than the two half-widths combined.
    """
    wanted = _scenarios(scenarios)
    estimates = {}
    for geometry in ("cap", "shell"):
        if any(montecarlo._SCENARIO_GEOMETRY[s] == geometry for s in wanted):
            estimates.update(montecarlo.estimate_all(cfg, n_trials, seed, geometry, threads))
    results = []
    for s in wanted:
        if s == "hap_plane_baseline":
            continue
        est = estimates[s]
        ref = ANALYTIC_REFERENCE[s](cfg).value
        tol = agreement_tolerance(est)
        diff = abs(ref - est.p_hat)
        results.append(CheckResult(s, est.p_hat, ref, tol, diff <= tol,
                                   f"|diff|={diff:.4f} ci95={est.ci95_halfwidth:.4f}"))
    if "hap_plane_baseline" in wanted:
        cap = estimates.get("hap_omni") or montecarlo.estimate_coverage(cfg, "hap_omni", None, n_trials, seed, threads)
        plane = montecarlo.estimate_coverage(cfg, "hap_plane_baseline", None, n_trials, seed, threads)
        slack = plane.ci95_halfwidth + cap.ci95_halfwidth
        results.append(CheckResult(
            "hap_plane_baseline", plane.p_hat, cap.p_hat, slack, plane.p_hat <= cap.p_hat + slack,
            f"plane - cap = {plane.p_hat - cap.p_hat:+.4f}",
        ))
    return results
