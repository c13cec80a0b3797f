"""Point processes on curves, surfaces and manifolds, and the HAP geometry.

A Poisson point process on a parametrised k-manifold is sampled as a
(generally inhomogeneous) PPP on the flat parameter box whose intensity is the
*equivalent density* ``lambda * sqrt(det Q)``, with ``Q`` the Gram matrix of
the chart's partial derivatives.  For the HAP sphere of radius ``b`` this is
``lambda * b**2 * sin(theta)`` on the ``(theta, phi)`` rectangle.

Coordinates: the earth's centre is the origin and the typical user sits at
``(0, 0, a)``.  HAPs live on the sphere (or shell) around the origin with
polar angle ``theta <= t``; base stations live on the disk of radius ``r_b``
tangent to the earth at the typical user.
"""

from dataclasses import dataclass, field
import csv
import functools
import itertools
import math
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateParametrizationError, DomainError, NumericalError

HAP = "HAP"
BS = "BS"

_FD_REL_STEP = 1e-6
_PROBE_INFLATION = 1.05


# -- system geometry ---------------------------------------------------------

def max_polar_angle(a, h):
    """Largest polar angle of a HAP at height ``h`` in line of sight of the user."""
    if not (a > 0 and h > 0):
        raise DomainError(f"earth radius a={a} and height h={h} must be > 0")
    return math.acos(a / (a + h))


@dataclass(frozen=True)
class SphericalCapSpec:
    """Visible cap of the HAP sphere.  ``b`` and ``t`` are derived."""

    earth_radius: float
    hap_height: float
    sphere_radius: float = field(init=False)
    max_polar_angle: float = field(init=False)

    def __post_init__(self):
        t = max_polar_angle(self.earth_radius, self.hap_height)
        object.__setattr__(self, "sphere_radius", self.earth_radius + self.hap_height)
        object.__setattr__(self, "max_polar_angle", t)

    @property
    def a(self):
        return self.earth_radius

    @property
    def b(self):
        return self.sphere_radius

    @property
    def t(self):
        return self.max_polar_angle

    def area(self):
        """Surface area ``2 pi b^2 (1 - cos t)`` (equal to ``2 pi b h``)."""
        return 2.0 * math.pi * self.b * self.hap_height


@dataclass(frozen=True)
class ShellSpec:
    """Cap thickened radially to ``[b - delta_h, b + delta_h]``."""

    cap: SphericalCapSpec
    delta_h: float

    def __post_init__(self):
        if not 0.0 <= self.delta_h < self.cap.hap_height:
            raise DomainError(
                f"delta_h={self.delta_h} must satisfy 0 <= delta_h < h={self.cap.hap_height}"
            )

    def expected_count(self, lam):
        """Mean number of points for surface density ``lam``."""
        b, dh, t = self.cap.b, self.delta_h, self.cap.t
        return lam * 2.0 * math.pi * (1.0 - math.cos(t)) * (b * b + dh * dh / 3.0)


def distance_to_typical_user(r, theta, a):
    """Distance from the point at spherical ``(r, theta, .)`` to ``(0, 0, a)``.

    Evaluated as ``sqrt((r - a)^2 + 4 a r sin^2(theta / 2))``, which equals
    ``sqrt(a^2 + r^2 - 2 a r cos theta)`` without cancellation near zenith.
    """
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    s = np.sin(theta / 2.0)
    out = np.sqrt((r - a) ** 2 + 4.0 * a * r * s * s)
    return float(out) if out.ndim == 0 else out


def hap_link_geometry(r, theta, a):
    """Squared link distance and cosine of the off-axis angle for HAPs at ``(r, theta)``."""
    s = np.sin(theta / 2.0)
    d2 = (r - a) ** 2 + 4.0 * a * r * s * s
    with np.errstate(invalid="ignore", divide="ignore"):
        cos_beta = (r - a * np.cos(theta)) / np.sqrt(d2)
    return d2, np.clip(np.nan_to_num(cos_beta, nan=1.0), -1.0, 1.0)


# -- point sets --------------------------------------------------------------

@dataclass(frozen=True)
class PointSet:
    """Sampled node positions of one network tier.

    ``params`` holds the chart coordinates: ``(theta, phi)`` on the cap,
    ``(r, theta, phi)`` in the shell, ``(radius, azimuth)`` on the BS disk.
    ``cartesian`` holds positions in metres, earth-centred.
    """

    tier: str
    params: np.ndarray
    cartesian: np.ndarray
    param_names: tuple = ()

    def __post_init__(self):
        for name in ("params", "cartesian"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self):
        return self.cartesian.shape[0]

    def csv_rows(self):
        for p, c in zip(self.params, self.cartesian):
            pars = [f"{v:.9g}" for v in p] + [""] * (3 - len(p))
            yield [self.tier, *pars, *(f"{v:.9g}" for v in c)]


POINT_CSV_HEADER = ("tier", "param1", "param2", "param3", "x", "y", "z")


def write_points_csv(fh, point_sets):
    """Write point sets in the ``tier,param1,param2,param3,x,y,z`` format."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(POINT_CSV_HEADER)
    for ps in point_sets:
        writer.writerows(ps.csv_rows())


def _sphere_cartesian(r, theta, phi):
    st = np.sin(theta)
    return np.column_stack([r * st * np.cos(phi), r * st * np.sin(phi), r * np.cos(theta)])


# -- samplers for the HAP and BS tiers ---------------------------------------

def _grid_cells(lo, hi, n):
    edges = np.linspace(lo, hi, n + 1)
    return edges[:-1], np.diff(edges)


@functools.lru_cache(maxsize=64)
def _cap_cells(t, n):
    th_lo, dth = _grid_cells(0.0, t, n)
    ph_lo, dph = _grid_cells(0.0, 2.0 * math.pi, n)
    sin_up = np.sin(th_lo + dth)
    for arr in (th_lo, dth, ph_lo, dph, sin_up):
        arr.setflags(write=False)
    return th_lo, dth, ph_lo, dph, sin_up


def cap_polar_draw(cap, lam, rng, n_intervals=64):
    """Polar and azimuth angles of a cap PPP, without building a :class:`PointSet`.

    Consumes ``rng`` exactly as :func:`sample_ppp_on_cap` does.
    """
    if lam < 0:
        raise DomainError("density must be >= 0")
    if n_intervals < 1:
        raise DomainError("n_intervals must be >= 1")
    b = cap.b
    th_lo, dth, ph_lo, dph, sin_up = _cap_cells(cap.t, int(n_intervals))
    lam_max = lam * b * b * sin_up
    mean = np.outer(lam_max * dth, dph)
    counts = rng.poisson(mean).ravel() if lam > 0 else np.zeros(mean.size, dtype=np.int64)
    n = int(counts.sum())
    cell = np.repeat(np.arange(counts.size), counts)
    row, col = np.divmod(cell, n_intervals)
    theta = th_lo[row] + dth[row] * rng.random(n)
    phi = ph_lo[col] + dph[col] * rng.random(n)
    keep = rng.random(n) < np.sin(theta) / sin_up[row]
    return theta[keep], phi[keep]


def sample_ppp_on_cap(cap, lam, rng, n_intervals=64):
    """Homogeneous PPP of surface density ``lam`` on a spherical cap.

    The ``[0, t] x [0, 2 pi]`` parameter rectangle is split into
    ``n_intervals**2`` cells.  Each cell receives a homogeneous PPP at the
    cell's maximum equivalent density ``lam b^2 sin(theta_upper)``; every
    point is then kept with probability ``sin(theta) / sin(theta_upper)`` and
    mapped onto the sphere.
    """
    theta, phi = cap_polar_draw(cap, lam, rng, n_intervals)
    return PointSet(
        HAP,
        np.column_stack([theta, phi]),
        _sphere_cartesian(cap.b, theta, phi),
        ("theta", "phi"),
    )


def sample_ppp_in_shell(shell, lam, rng, n_intervals=64):
    """PPP in a spherical shell with volume density ``lam / (2 delta_h)``.

    Same cell-and-thin scheme as :func:`sample_ppp_on_cap`, using the
    three-dimensional equivalent density ``lam / (2 delta_h) r^2 sin(theta)``
    with the radial range kept as a single slab.
    """
    if shell.delta_h == 0.0:
        ps = sample_ppp_on_cap(shell.cap, lam, rng, n_intervals)
        r = np.full(len(ps), shell.cap.b)
        return PointSet(HAP, np.column_stack([r, ps.params]), ps.cartesian, ("r", "theta", "phi"))
    if lam < 0:
        raise DomainError("density must be >= 0")
    b, t, dh = shell.cap.b, shell.cap.t, shell.delta_h
    r_lo, r_hi = b - dh, b + dh
    vol_density = lam / (2.0 * dh)
    th_lo, dth = _grid_cells(0.0, t, n_intervals)
    ph_lo, dph = _grid_cells(0.0, 2.0 * math.pi, n_intervals)
    sin_up = np.sin(th_lo + dth)
    lam_max = vol_density * r_hi * r_hi * sin_up
    mean = np.outer(lam_max * dth * (r_hi - r_lo), dph)
    counts = rng.poisson(mean).ravel() if lam > 0 else np.zeros(mean.size, dtype=np.int64)
    n = int(counts.sum())
    cell = np.repeat(np.arange(counts.size), counts)
    row, col = np.divmod(cell, n_intervals)
    r = r_lo + (r_hi - r_lo) * rng.random(n)
    theta = th_lo[row] + dth[row] * rng.random(n)
    phi = ph_lo[col] + dph[col] * rng.random(n)
    ratio = (r / r_hi) ** 2 * np.sin(theta) / sin_up[row]
    keep = rng.random(n) < ratio
    r, theta, phi = r[keep], theta[keep], phi[keep]
    return PointSet(
        HAP,
        np.column_stack([r, theta, phi]),
        _sphere_cartesian(r, theta, phi),
        ("r", "theta", "phi"),
    )


def sample_disk_radii(lam, r_b, rng):
    """Distances of a PPP of density ``lam`` on a disk of radius ``r_b`` to its centre.

    Radii are ``r_b * sqrt(1 - U)`` so that a zero radius has probability zero.
    """
    if lam < 0:
        raise DomainError("density must be >= 0")
    if not r_b > 0:
        raise DomainError("r_b must be > 0")
    n = rng.poisson(lam * math.pi * r_b * r_b) if lam > 0 else 0
    return r_b * np.sqrt(1.0 - rng.random(n))


def sample_ppp_on_disk(lam, r_b, rng, a=0.0):
    """PPP on the flat disk of radius ``r_b`` tangent to the earth at ``(0, 0, a)``."""
    rho = sample_disk_radii(lam, r_b, rng)
    az = 2.0 * math.pi * rng.random(rho.size)
    cart = np.column_stack([rho * np.cos(az), rho * np.sin(az), np.full(rho.size, float(a))])
    return PointSet(BS, np.column_stack([rho, az]), cart, ("radius", "azimuth"))


# -- generalised PPP on parametric manifolds ---------------------------------

@dataclass(frozen=True)
class ParametricManifold:
    """A chart ``map: box in R^n -> R^d``.

    ``map`` takes a parameter vector of length ``n`` and returns a point.
    ``domain`` is a sequence of ``(min, max)`` pairs, one per axis.
    """

    dimension: int
    domain: Sequence
    map: Callable

    def __post_init__(self):
        if self.dimension < 1:
            raise DomainError("dimension must be >= 1")
        dom = np.asarray(self.domain, dtype=float).reshape(-1, 2)
        if dom.shape[0] != self.dimension:
            raise DomainError("domain must have one (min, max) pair per dimension")
        if not np.all(np.isfinite(dom)) or np.any(dom[:, 0] >= dom[:, 1]):
            raise DomainError("domain bounds must be finite with min < max")
        dom.setflags(write=False)
        object.__setattr__(self, "domain", dom)

    @property
    def widths(self):
        return self.domain[:, 1] - self.domain[:, 0]

    def contains(self, x, tol=1e-12):
        x = np.asarray(x, dtype=float)
        slack = tol * np.maximum(self.widths, 1.0)
        return bool(np.all(x >= self.domain[:, 0] - slack) and np.all(x <= self.domain[:, 1] + slack))

    def partials(self, x):
        """Finite-difference partial derivatives, one column per parameter.

        Central differences with step ``1e-6 * width`` per axis; a second-order
        one-sided stencil replaces the central one where it would leave the
        domain box.
        """
        x = np.asarray(x, dtype=float).reshape(self.dimension)
        f0 = None
        cols = []
        for i in range(self.dimension):
            step = _FD_REL_STEP * self.widths[i]
            e = np.zeros(self.dimension)
            e[i] = step
            lo, hi = self.domain[i]
            if x[i] - step >= lo and x[i] + step <= hi:
                d = (np.asarray(self.map(x + e), float) - np.asarray(self.map(x - e), float)) / (2 * step)
            else:
                sign = 1.0 if x[i] - step < lo else -1.0
                if f0 is None:
                    f0 = np.asarray(self.map(x), float)
                f1 = np.asarray(self.map(x + sign * e), float)
                f2 = np.asarray(self.map(x + 2 * sign * e), float)
                d = sign * (-3.0 * f0 + 4.0 * f1 - f2) / (2 * step)
            cols.append(d)
        return np.column_stack(cols)

    def gram(self, x):
        j = self.partials(x)
        return j.T @ j

    def validate(self, n_probe=5):
        """Check that the Gram determinant is positive on an interior probe grid."""
        axes = [lo + (hi - lo) * (np.arange(n_probe) + 0.5) / n_probe for lo, hi in self.domain]
        for x in itertools.product(*axes):
            det = np.linalg.det(self.gram(np.array(x)))
            if not det > 0:
                raise DegenerateParametrizationError(
                    f"Gram determinant {det:g} <= 0 at interior point {tuple(x)}"
                )


def _volume_factor(mfd, x):
    q = mfd.gram(x)
    det = float(np.linalg.det(q))
    scale = float(np.prod(np.diag(q))) if q.size else 0.0
    # Zero up to rounding marks a coordinate singularity (e.g. a pole).
    if det < -1e-10 * max(scale, np.finfo(float).tiny):
        raise DegenerateParametrizationError(f"Gram determinant {det:g} < 0 at {tuple(np.ravel(x))}")
    return math.sqrt(max(det, 0.0))


def _call_density(density, x, unpack):
    if callable(density):
        return float(density(*x)) if unpack else float(density(np.asarray(x)))
    return float(density)


def _check_dim(mfd, n, x):
    if mfd.dimension != n:
        raise DomainError(f"expected a {n}-dimensional chart, got dimension {mfd.dimension}")
    if not mfd.contains(x):
        raise DomainError(f"parameter {tuple(np.ravel(x))} is outside the chart domain")


def equivalent_density_curve(curve, density, t):
    """``lambda(t) * |r'(t)|`` for a curve chart; ``density`` is a callable of t or a constant."""
    x = np.array([t], dtype=float)
    _check_dim(curve, 1, x)
    speed = float(np.linalg.norm(curve.partials(x)[:, 0]))
    return _call_density(density, x, True) * speed


def equivalent_density_surface(surface, density, u, v):
    """``lambda(u, v) * sqrt(EG - F^2)`` for a surface chart."""
    x = np.array([u, v], dtype=float)
    _check_dim(surface, 2, x)
    j = surface.partials(x)
    ru, rv = j[:, 0], j[:, 1]
    E, F, G = ru @ ru, ru @ rv, rv @ rv
    disc = E * G - F * F
    if disc < -1e-10 * max(E * G, np.finfo(float).tiny):
        raise DegenerateParametrizationError(f"EG - F^2 = {disc:g} < 0 at (u, v) = ({u}, {v})")
    return _call_density(density, x, True) * math.sqrt(max(disc, 0.0))


def equivalent_density_manifold(mfd, density, x):
    """``lambda(x) * sqrt(det Q)`` with ``Q`` the Gram matrix of the chart partials.

    ``density`` is a callable taking the parameter vector, or a constant.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    _check_dim(mfd, mfd.dimension, x)
    return _call_density(density, x, False) * _volume_factor(mfd, x)


def sample_ppp_on_manifold(mfd, density, rng, n_intervals=8, tier=HAP):
    """PPP on a parametric manifold by cell-wise thinning in parameter space.

    Each of the ``n_intervals**n`` cells is bounded by the largest equivalent
    density found on a 3-per-axis probe grid, inflated by 5%.  A realised
    point whose retention ratio exceeds one means the bound was wrong and is
    reported as :class:`~hapnet.errors.NumericalError`.
    """
    mfd.validate()
    n = mfd.dimension
    edges = [np.linspace(lo, hi, n_intervals + 1) for lo, hi in mfd.domain]

    def lam_e(x):
        if mfd.contains(x):
            return equivalent_density_manifold(mfd, density, x)
        return _call_density(density, x, False) * _volume_factor(mfd, x)

    params = []
    for idx in itertools.product(range(n_intervals), repeat=n):
        lo = np.array([edges[k][i] for k, i in enumerate(idx)])
        hi = np.array([edges[k][i + 1] for k, i in enumerate(idx)])
        probes = itertools.product(*[(l, 0.5 * (l + h), h) for l, h in zip(lo, hi)])
        bound = _PROBE_INFLATION * max(lam_e(np.array(p)) for p in probes)
        if bound <= 0.0:
            continue
        count = rng.poisson(bound * float(np.prod(hi - lo)))
        if count == 0:
            continue
        pts = lo + (hi - lo) * rng.random((count, n))
        u = rng.random(count)
        for p, ui in zip(pts, u):
            ratio = lam_e(p) / bound
            if ratio > 1.0:
                raise NumericalError(
                    f"thinning bound violated in cell {idx}: retention ratio {ratio:.6g} > 1"
                )
            if ui < ratio:
                params.append(p)
    params = np.array(params, dtype=float).reshape(-1, n)
    cart = np.array([np.asarray(mfd.map(p), float) for p in params]).reshape(len(params), -1)
    return PointSet(tier, params, cart, tuple(f"x{i + 1}" for i in range(n)))
