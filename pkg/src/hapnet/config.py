"""Scenario configuration: defaults, unit-aware parsing, hashing.

Config files are YAML mappings with flat keys and a ``schema`` version::

    schema: 1
    h: 30km
    lambda_h: 2e-10/m2
    theta_3db: 40deg

Values may carry a unit suffix.  Bare numbers are SI (metres, watts, per
square metre), except ``theta_3db`` where a bare number means degrees.
``epsilon`` also accepts ``dB``.  Defaults reproduce the reference
simulation parameter table for h = 20 km.
"""

from dataclasses import asdict, dataclass, fields, replace
import hashlib
import json
import math
import re

import yaml

from .antenna import AntennaPattern, Omnidirectional
from .channels import check_shape
from .errors import ConfigError, DomainError
from .geometry import ShellSpec, SphericalCapSpec

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class NetworkConfig:
    """Every scenario parameter plus solver settings, all in SI units."""

    P_h: float = 50.0
    P_g: float = 20.0
    P_n: float = 1e-9
    alpha_h: float = 2.0
    alpha_g: float = 4.0
    lambda_h: float = 1e-10
    lambda_g: float = 3e-5
    r_b: float = 10e3
    epsilon: float = 0.1
    a: float = 6371e3
    h: float = 20e3
    y0: float = 50.0
    m: int = 2
    sigma_sq: float = 0.5
    theta_3db: float = math.radians(40.0)
    mainlobe_exponent: int = 2
    antenna: str = "omni"
    delta_h: float = 0.0
    x0: float | None = None
    kappa: float = 0.8
    plane_radius: float | None = None
    n_intervals: int = 64
    quad_epsabs: float = 1e-10
    quad_epsrel: float = 1e-8
    quad_limit: int = 200
    n_radial: int = 16
    n_x0: int = 16

    def __post_init__(self):
        for key in ("P_h", "P_g", "P_n", "alpha_h", "alpha_g", "epsilon", "a", "h",
                    "r_b", "y0", "sigma_sq", "quad_epsrel"):
            if not getattr(self, key) > 0:
                raise ConfigError(key, f"must be > 0, got {getattr(self, key)!r}")
        for key in ("lambda_h", "lambda_g", "quad_epsabs"):
            if not getattr(self, key) >= 0:
                raise ConfigError(key, f"must be >= 0, got {getattr(self, key)!r}")
        try:
            object.__setattr__(self, "m", check_shape(self.m))
        except DomainError as exc:
            raise ConfigError("m", str(exc)) from None
        if not 0.0 < self.kappa < 1.0:
            raise ConfigError("kappa", "must lie in (0, 1)")
        if not 0.0 <= self.delta_h < self.h:
            raise ConfigError("delta_h", "must satisfy 0 <= delta_h < h")
        if self.x0 is not None and not self.x0 > 0:
            raise ConfigError("x0", "must be > 0")
        if self.x0 is not None and self.delta_h > 0 and not self.x0 > self.delta_h:
            raise ConfigError("x0", "must exceed delta_h under height fluctuation")
        if self.plane_radius is not None and not self.plane_radius > 0:
            raise ConfigError("plane_radius", "must be > 0")
        if self.antenna not in ("omni", "directional"):
            raise ConfigError("antenna", "must be 'omni' or 'directional'")
        for key in ("n_intervals", "quad_limit", "n_radial", "n_x0"):
            v = getattr(self, key)
            if isinstance(v, bool) or not float(v).is_integer() or v < 1:
                raise ConfigError(key, "must be an integer >= 1")
            object.__setattr__(self, key, int(v))
        try:
            AntennaPattern(self.theta_3db, self.mainlobe_exponent)
        except DomainError as exc:
            key = "mainlobe_exponent" if "exponent" in str(exc) else "theta_3db"
            raise ConfigError(key, str(exc)) from None

    # derived quantities
    @property
    def b(self):
        return self.a + self.h

    @property
    def t(self):
        return self.cap.t

    @property
    def cap(self):
        return SphericalCapSpec(self.a, self.h)

    @property
    def shell(self):
        return ShellSpec(self.cap, self.delta_h)

    @property
    def serving_distance(self):
        """Distance from the typical HAP user to its serving HAP (default ``h``)."""
        return self.h if self.x0 is None else self.x0

    @property
    def pattern(self):
        """Directional pattern built from ``theta_3db`` and ``mainlobe_exponent``."""
        return AntennaPattern(self.theta_3db, self.mainlobe_exponent)

    @property
    def active_pattern(self):
        return self.pattern if self.antenna == "directional" else Omnidirectional()

    @property
    def bs_truncation_radius(self):
        return self.r_b

    def replace(self, **changes):
        return replace(self, **changes)

    def to_dict(self):
        return asdict(self)

    def config_hash(self):
        """First 16 hex digits of the SHA-256 of the canonical JSON form."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def metadata(self):
        return {
            "config_hash": self.config_hash(),
            "serving_distance_m": self.serving_distance,
            "serving_placement": "zenith; x0 uniform over [h - delta_h, h + delta_h] under fluctuation",
            "capacity_log": "natural",
        }


# -- unit-aware parsing ------------------------------------------------------

_UNITS = {
    "length": {"": 1.0, "m": 1.0, "km": 1e3},
    "power": {"": 1.0, "w": 1.0, "mw": 1e-3, "kw": 1e3},
    "density": {"": 1.0, "/m2": 1.0, "1/m2": 1.0, "m-2": 1.0, "pcs/m2": 1.0,
                "/km2": 1e-6, "1/km2": 1e-6, "km-2": 1e-6, "pcs/km2": 1e-6},
    "angle": {"": math.pi / 180.0, "deg": math.pi / 180.0, "rad": 1.0},
    "scalar": {"": 1.0},
    "integer": {"": 1.0},
}

_KINDS = {
    "P_h": "power", "P_g": "power", "P_n": "power",
    "alpha_h": "scalar", "alpha_g": "scalar",
    "lambda_h": "density", "lambda_g": "density",
    "r_b": "length", "epsilon": "scalar", "a": "length", "h": "length",
    "y0": "length", "m": "integer", "sigma_sq": "scalar",
    "theta_3db": "angle", "mainlobe_exponent": "integer", "antenna": "choice",
    "delta_h": "length", "x0": "length", "kappa": "scalar",
    "plane_radius": "length", "n_intervals": "integer",
    "quad_epsabs": "scalar", "quad_epsrel": "scalar", "quad_limit": "integer",
    "n_radial": "integer", "n_x0": "integer",
}

_ORIGIN = {
    "P_h": "reference default: 50 W", "P_g": "reference default: 20 W", "P_n": "reference default: 1e-9 W",
    "alpha_h": "reference default: 2", "alpha_g": "reference default: 4",
    "lambda_h": "reference default: 1e-10 pcs/m2", "lambda_g": "reference default: 3e-5 pcs/m2",
    "r_b": "reference default: 10 km", "epsilon": "reference default: 0.1", "a": "reference default: 6371 km",
    "h": "reference default: 20-50 km (20 km default)", "y0": "reference default: 50 m",
    "m": "reference default: 2", "sigma_sq": "reference default: 0.5",
    "theta_3db": "reference default: 40 deg", "kappa": "terrestrial coverage constraint",
    "mainlobe_exponent": "2 = Gaussian main lobe, 1 = linear form",
    "antenna": "omni | directional", "delta_h": "height fluctuation half-thickness",
    "x0": "serving distance; null = h (zenith)",
    "plane_radius": "plane-baseline truncation; null = a (used when alpha_h <= 2)",
    "n_intervals": "cells per axis of the cap sampler",
    "quad_epsabs": "quadrature absolute tolerance", "quad_epsrel": "quadrature relative tolerance",
    "quad_limit": "quadrature subinterval limit", "n_radial": "Gauss-Legendre nodes across the shell",
    "n_x0": "Gauss-Legendre nodes of the serving-distance average",
}

_NUMBER = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(.*?)\s*$")


def parse_value(key, raw):
    """Convert a raw config value for ``key`` to its SI representation."""
    if key not in _KINDS:
        raise ConfigError(key, "unknown configuration key")
    kind = _KINDS[key]
    if raw is None or (isinstance(raw, str) and raw.strip().lower() in ("null", "none", "")):
        if key in ("x0", "plane_radius"):
            return None
        raise ConfigError(key, "value required")
    if kind == "choice":
        return str(raw).strip()
    if isinstance(raw, bool):
        raise ConfigError(key, "boolean is not a valid value")
    if isinstance(raw, (int, float)):
        number, unit = float(raw), ""
        if kind == "integer" and float(raw).is_integer():
            return int(raw)
    else:
        match = _NUMBER.match(str(raw))
        if not match:
            raise ConfigError(key, f"cannot parse {raw!r} as a number with optional unit")
        number, unit = float(match.group(1)), match.group(2)
    ulow = unit.lower().replace(" ", "")
    if kind == "power" and ulow in ("dbw", "dbm"):
        return 10.0 ** ((number - (30.0 if ulow == "dbm" else 0.0)) / 10.0)
    if key == "epsilon" and ulow == "db":
        return 10.0 ** (number / 10.0)
    table = _UNITS[kind]
    if ulow not in table:
        raise ConfigError(key, f"unit {unit!r} is not a valid {kind} unit")
    value = number * table[ulow]
    if kind == "integer":
        if not value.is_integer():
            raise ConfigError(key, f"{raw!r} is not an integer")
        return int(value)
    return value


def parse_overrides(pairs):
    out = {}
    for item in pairs or ():
        if "=" not in item:
            raise ConfigError(item, "override must look like key=value")
        key, raw = item.split("=", 1)
        key = key.strip()
        out[key] = parse_value(key, raw.strip())
    return out


def config_from_mapping(data):
    data = dict(data or {})
    schema = data.pop("schema", SCHEMA_VERSION)
    if schema != SCHEMA_VERSION:
        raise ConfigError("schema", f"unsupported schema version {schema!r}")
    values = {key: parse_value(key, raw) for key, raw in data.items()}
    try:
        return NetworkConfig(**values)
    except TypeError as exc:
        raise ConfigError("config", str(exc)) from None


def parse_config(path=None, overrides=()):
    """Load a config file (or defaults when ``path`` is None) and apply ``key=value`` overrides."""
    data = {}
    if path is not None:
        try:
            with open(path) as fh:
                data = yaml.safe_load(fh) or {}
        except yaml.YAMLError as exc:
            raise ConfigError("file", f"invalid YAML in {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("file", f"{path} must contain a mapping")
    cfg = config_from_mapping(data)
    changes = parse_overrides(overrides)
    if changes:
        try:
            cfg = cfg.replace(**changes)
        except TypeError as exc:
            raise ConfigError("override", str(exc)) from None
    return cfg


def _format(key, value):
    if value is None:
        return "null"
    kind = _KINDS[key]
    if kind == "choice":
        return value
    if kind == "integer":
        return str(int(value))
    unit = {"length": "m", "power": "W", "density": "/m2", "angle": "rad"}.get(kind, "")
    return f"{float(value)!r}{unit}"


def dump_config(cfg):
    """YAML text of ``cfg`` with each key annotated by its origin; re-parses hash-equal."""
    lines = [f"schema: {SCHEMA_VERSION}"]
    for f in fields(cfg):
        value = _format(f.name, getattr(cfg, f.name))
        lines.append(f"{f.name}: {value}  # {_ORIGIN[f.name]}")
    return "\n".join(lines) + "\n"
