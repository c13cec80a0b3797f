"""Command-line front end.

Every command reads a config (``--config``, YAML, ``schema: 1``) plus
``--set key=value`` overrides and writes CSV to ``--output`` (stdout by
default).  Coverage tables use the columns::

    sweep_axis,value,method,coverage,ci95,seed,config_hash

``value`` is in SI units (metres, per square metre, radians).  Exit codes:
0 success, 2 config error, 3 numerical or tolerance failure, 4 infeasible.
"""

import argparse
import contextlib
import csv
import math
import os
import sys

import numpy as np

from . import analytic, montecarlo, validation
from .config import dump_config, parse_config, parse_value
from .errors import (
    CapabilityError, ConfigError, DomainError, InfeasibleError, NumericalError,
)
from .geometry import sample_ppp_in_shell, sample_ppp_on_disk, write_points_csv
from .rng import SAMPLER, stream

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_INFEASIBLE = 0, 2, 3, 4

COVERAGE_HEADER = ("sweep_axis", "value", "method", "coverage", "ci95", "seed", "config_hash")
CAPACITY_HEADER = ("sweep_axis", "value", "method", "coverage", "capacity", "seed", "config_hash")
OPTIMUM_HEADER = ("lambda_opt", "capacity", "constraint_active", "lower_bound",
                  "upper_bound", "kappa", "config_hash")
VALIDATE_HEADER = ("check", "measured", "reference", "tolerance", "passed", "detail")

_METHODS = ("exact", "approx", "mc")

_EXACT = {
    "hap_omni": lambda cfg: analytic.coverage_hap_exact(cfg),
    "hap_dir": lambda cfg: analytic.coverage_hap_directional_exact(cfg),
    "bs_omni": analytic.coverage_terrestrial,
    "bs_dir": lambda cfg: analytic.coverage_terrestrial_directional(cfg),
    "hap_fluct_omni": lambda cfg: analytic.coverage_hap_fluct(cfg, analytic.EXACT),
    "hap_fluct_dir": lambda cfg: analytic.coverage_hap_directional_fluct(cfg, method=analytic.EXACT),
}


def _fmt(x):
    return repr(float(x))


def parse_grid(axis, text):
    """Grid from ``start:step:stop`` (inclusive) or a comma list; values may carry units."""
    key = montecarlo.SWEEP_AXES.get(axis)
    if key is None:
        raise ConfigError("axis", f"unknown sweep axis {axis!r}")
    def conv(raw):
        return float(parse_value(key, raw.strip()))

    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError("grid", "range grid must look like start:step:stop")
        start, step, stop = (conv(p) for p in parts)
        if not step > 0 or stop < start:
            raise ConfigError("grid", "need step > 0 and stop >= start")
        n = int(math.floor((stop - start) / step * (1 + 1e-12) + 1e-9)) + 1
        return [start + i * step for i in range(n)]
    values = [conv(p) for p in text.split(",") if p.strip()]
    if not values:
        raise ConfigError("grid", "grid is empty")
    return values


def _default_scenario(cfg):
    prefix = "hap_fluct" if cfg.delta_h > 0 else "hap"
    return f"{prefix}_{'dir' if cfg.antenna == 'directional' else 'omni'}"


def _coverage_row(cfg, scenario, method, axis, value, args):
    if method == "mc":
        est = montecarlo.estimate_coverage(cfg, scenario, None, args.trials, args.seed, args.threads)
        return (axis, value, "mc", est.p_hat, est.ci95_halfwidth, args.seed, cfg.config_hash())
    table = _EXACT if method == "exact" else validation.ANALYTIC_REFERENCE
    if scenario not in table:
        raise CapabilityError(f"scenario {scenario!r} has no analytic {method} form; use --methods mc")
    res = table[scenario](cfg)
    return (axis, value, res.method, res.value, res.abs_error_estimate, args.seed, cfg.config_hash())


def _write(out, header, rows):
    writer = csv.writer(out)
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def _methods(text):
    names = [m.strip() for m in text.split(",") if m.strip()]
    for m in names:
        if m not in _METHODS:
            raise ConfigError("methods", f"unknown method {m!r}; choose from {_METHODS}")
    return names


def cmd_coverage(cfg, args, out):
    scenario = args.scenario or _default_scenario(cfg)
    rows = [_coverage_row(cfg, scenario, m, "none", "", args) for m in _methods(args.methods)]
    _write(out, COVERAGE_HEADER, rows)
    return EXIT_OK


def cmd_sweep(cfg, args, out):
    scenario = args.scenario or _default_scenario(cfg)
    grid = parse_grid(args.axis, args.grid)
    methods = _methods(args.methods)
    key = montecarlo.SWEEP_AXES[args.axis]
    rows = []
    mc_rows = {}
    if "mc" in methods:
        for r in montecarlo.sweep(cfg, scenario, args.axis, grid, args.trials, args.seed, args.threads):
            mc_rows[r.value] = (args.axis, r.value, "mc", r.estimate.p_hat,
                                r.estimate.ci95_halfwidth, args.seed, r.config_hash)
    for v in grid:
        c = cfg.replace(**{key: v})
        for m in methods:
            rows.append(mc_rows[v] if m == "mc" else _coverage_row(c, scenario, m, args.axis, v, args))
    _write(out, COVERAGE_HEADER, rows)
    return EXIT_OK


def cmd_capacity(cfg, args, out):
    directional = cfg.antenna == "directional"
    method = "approximate"
    if args.sweep is None:
        cov, cap = analytic.capacity_curve(cfg, [cfg.lambda_h], directional)
        rows = [("none", "", method, cov[0], cap[0], args.seed, cfg.config_hash())]
    else:
        grid = analytic.DEFAULT_DENSITY_GRID if args.grid is None else parse_grid("density", args.grid)
        cov, cap = analytic.capacity_curve(cfg, grid, directional)
        lo, hi = analytic.optimal_density_bounds(cfg, directional)
        i = int(np.argmax(cap))
        print(f"# argmax lambda_h={grid[i]:.6g} /m2, bounds [{lo:.6g}, {hi:.6g}]", file=sys.stderr)
        rows = [("density", float(l), method, c, t, args.seed, cfg.config_hash())
                for l, c, t in zip(grid, cov, cap)]
    _write(out, CAPACITY_HEADER, rows)
    return EXIT_OK


def cmd_optimal_density(cfg, args, out):
    directional = cfg.antenna == "directional"
    opt = analytic.optimal_density_search(cfg, args.constraint, directional)
    lo, hi = analytic.optimal_density_bounds(cfg, directional)
    _write(out, OPTIMUM_HEADER, [(opt.lambda_h, opt.capacity, str(opt.constraint_active).lower(),
                                  lo, hi, cfg.kappa, cfg.config_hash())])
    return EXIT_OK


def cmd_validate(cfg, args, out):
    results = validation.run_validation(cfg, args.scenario, args.trials, args.seed, args.threads)
    _write(out, VALIDATE_HEADER, [(r.name, r.measured, r.reference, r.tolerance,
                                   "pass" if r.passed else "fail", r.detail) for r in results])
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"validation failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_sample_points(cfg, args, out):
    tiers = [t.strip().lower() for t in args.tiers.split(",")]
    sets = []
    if "hap" in tiers:
        sets.append(sample_ppp_in_shell(cfg.shell, cfg.lambda_h, stream(args.seed, 0, SAMPLER), cfg.n_intervals))
    if "bs" in tiers:
        sets.append(sample_ppp_on_disk(cfg.lambda_g, cfg.r_b, stream(args.seed, 1, SAMPLER), cfg.a))
    if not sets:
        raise ConfigError("tiers", "choose hap, bs or both")
    write_points_csv(out, sets)
    return EXIT_OK


COMMANDS = {
    "coverage": cmd_coverage, "sweep": cmd_sweep, "capacity": cmd_capacity,
    "optimal-density": cmd_optimal_density, "validate": cmd_validate,
    "sample-points": cmd_sample_points,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML config file (schema: 1)")
    common.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="override a config key; repeatable")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", default=None,
                        help="worker threads, integer or 'auto' (env HAPNET_THREADS)")
    common.add_argument("-o", "--output", help="output CSV path (default stdout)")
    common.add_argument("--print-config", action="store_true",
                        help="print the resolved config as YAML and exit")

    parser = argparse.ArgumentParser(prog="hapnet", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coverage", parents=[common], help="coverage at one configuration")
    p.add_argument("--scenario", choices=montecarlo.SCENARIOS)
    p.add_argument("--methods", default="approx", help="comma list of exact, approx, mc")
    p.add_argument("--trials", type=int, default=10_000)

    p = sub.add_parser("sweep", parents=[common], help="coverage over a parameter grid")
    p.add_argument("--axis", required=True, choices=tuple(montecarlo.SWEEP_AXES))
    p.add_argument("--grid", required=True, help="start:step:stop or comma list")
    p.add_argument("--scenario", choices=montecarlo.SCENARIOS)
    p.add_argument("--methods", default="approx")
    p.add_argument("--trials", type=int, default=10_000)

    p = sub.add_parser("capacity", parents=[common], help="transmission capacity")
    p.add_argument("--sweep", choices=("density",))
    p.add_argument("--grid", help="density grid (default 200-point log grid 1e-13..1e-7)")

    p = sub.add_parser("optimal-density", parents=[common], help="capacity-optimal HAP density")
    p.add_argument("--constraint", action="store_true",
                   help="require terrestrial coverage >= kappa")

    p = sub.add_parser("validate", parents=[common], help="analytic vs Monte Carlo cross-check")
    p.add_argument("--scenario", default="all", help="'all' or comma list of scenarios")
    p.add_argument("--trials", type=int, default=10_000)

    p = sub.add_parser("sample-points", parents=[common], help="point-cloud CSV of one realisation")
    p.add_argument("--tiers", default="hap,bs")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.threads not in (None, "auto"):
            try:
                args.threads = int(args.threads)
            except ValueError:
                raise ConfigError("threads", "must be an integer or 'auto'") from None
        args.threads = montecarlo.resolve_threads(args.threads)
        cfg = parse_config(args.config, args.overrides)
        if args.print_config:
            sys.stdout.write(dump_config(cfg))
            return EXIT_OK
        with contextlib.ExitStack() as stack:
            out = (stack.enter_context(open(args.output, "w", newline=""))
                   if args.output else sys.stdout)
            return COMMANDS[args.command](cfg, args, out)
    except (ConfigError, CapabilityError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except BrokenPipeError:
        # downstream reader closed early (e.g. piped into head)
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
