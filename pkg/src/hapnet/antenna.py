"""Fixed nadir-pointing HAP antenna patterns.

The directional pattern has a main lobe that falls off from the peak gain
``G0`` as ``3.01 * (2 beta / theta_3db) ** p`` dB out to half the main-lobe
width ``theta_ml = 2.6 * theta_3db``, and a constant side-lobe level beyond::

    G0   = 10 log10(1.6162 / sin(theta_3db / 2))          [dB]
    G_sl = -0.4111 ln(theta_3db in degrees) - 10.597     [dB]

``p`` (``mainlobe_exponent``) is 2 by default, the Gaussian main lobe; 1
reproduces the linear-in-angle form.  The two branches do not meet at
``theta_ml / 2`` for either exponent, so the pattern has a small jump there.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError

_ANGLE_TOL = 1e-12


@dataclass(frozen=True)
class AntennaPattern:
    """Directional gain model.

    Parameters
    ----------
    theta_3db : float
        Half-power beamwidth in radians.
    mainlobe_exponent : int
        Exponent applied to ``2 beta / theta_3db`` in the main lobe (1 or 2).
    """

    theta_3db: float = math.radians(40.0)
    mainlobe_exponent: int = 2

    def __post_init__(self):
        if not 0.0 < self.theta_3db < math.pi:
            raise DomainError(f"theta_3db={self.theta_3db} rad must lie in (0, pi)")
        if self.mainlobe_exponent not in (1, 2):
            raise DomainError("mainlobe_exponent must be 1 or 2")

    directional = True

    @property
    def theta_ml(self):
        return 2.6 * self.theta_3db

    @property
    def g0_db(self):
        return 10.0 * math.log10(1.6162 / math.sin(self.theta_3db / 2.0))

    @property
    def gsl_db(self):
        return -0.4111 * math.log(math.degrees(self.theta_3db)) - 10.597

    @property
    def peak_gain(self):
        """Linear gain on the beam axis, ``10 ** (G0 / 10)``."""
        return 10.0 ** (self.g0_db / 10.0)

    def gain_db(self, beta):
        beta = _check_beta(beta)
        main = self.g0_db - 3.01 * (2.0 * beta / self.theta_3db) ** self.mainlobe_exponent
        out = np.where(beta <= self.theta_ml / 2.0, main, self.gsl_db)
        return float(out) if out.ndim == 0 else out

    def gain(self, beta):
        """Linear power gain at off-axis angle ``beta`` (radians, in [0, pi])."""
        out = 10.0 ** (np.asarray(self.gain_db(beta)) / 10.0)
        return float(out) if out.ndim == 0 else out

    def metadata(self):
        return {
            "antenna": "directional",
            "theta_3db_deg": math.degrees(self.theta_3db),
            "mainlobe_exponent": self.mainlobe_exponent,
            "g0_db": self.g0_db,
            "gsl_db": self.gsl_db,
            "theta_ml_deg": math.degrees(self.theta_ml),
            "gsl_log_argument": "degrees",
        }


@dataclass(frozen=True)
class Omnidirectional:
    """Unit gain in every direction."""

    directional = False
    peak_gain = 1.0
    g0_db = 0.0

    def gain(self, beta):
        beta = _check_beta(beta)
        out = np.ones_like(beta)
        return float(out) if out.ndim == 0 else out

    def gain_db(self, beta):
        out = np.zeros_like(_check_beta(beta))
        return float(out) if out.ndim == 0 else out

    def metadata(self):
        return {"antenna": "omni"}


def _check_beta(beta):
    beta = np.asarray(beta, dtype=float)
    if np.any(beta < -_ANGLE_TOL) or np.any(beta > math.pi + _ANGLE_TOL):
        raise DomainError("off-axis angle must lie in [0, pi]")
    return np.clip(beta, 0.0, math.pi)


def offaxis_angle(theta, a, b):
    """Angle between the HAP-to-user link and the HAP's nadir beam axis.

    ``theta`` is the polar angle of a HAP at radius ``b`` seen from the
    earth's centre; the user sits at radius ``a`` on the polar axis.
    """
    theta = np.asarray(theta, dtype=float)
    dist = np.sqrt(a * a + b * b - 2.0 * a * b * np.cos(theta))
    with np.errstate(invalid="ignore", divide="ignore"):
        c = (b - a * np.cos(theta)) / dist
    c = np.where(dist > 0, np.clip(c, -1.0, 1.0), 1.0)
    out = np.arccos(c)
    return float(out) if out.ndim == 0 else out


def mainlobe_edge_polar_angle(pattern, a, b, t):
    """Polar angle in ``(0, t)`` where the off-axis angle reaches ``theta_ml / 2``.

    Returns ``None`` when the main-lobe edge is not crossed on ``[0, t]``
    (omnidirectional patterns, or a main lobe wider than the visible cap).
    """
    if not pattern.directional:
        return None
    edge = pattern.theta_ml / 2.0
    if offaxis_angle(t, a, b) <= edge:
        return None
    return brentq(lambda th: offaxis_angle(th, a, b) - edge, 0.0, t, xtol=1e-15, rtol=1e-14)


def gain_ratio_range(pattern, a, b):
    """Extreme values of ``G(beta) / G(0)`` over the visible off-axis range.

    The visible range of off-axis angles is ``[0, arcsin(a / b)]``.
    """
    if not pattern.directional:
        return 1.0, 1.0
    beta_max = math.asin(a / b)
    grid = np.linspace(0.0, beta_max, 4097)
    edge = pattern.theta_ml / 2.0
    if edge < beta_max:
        grid = np.concatenate([grid, [edge, np.nextafter(edge, 4.0)]])
    ratios = pattern.gain(grid) / pattern.peak_gain
    return float(ratios.min()), float(ratios.max())
