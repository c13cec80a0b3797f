"""Small-scale fading models.

Both fading variables are *power* gains that multiply path loss directly.
Air-to-ground links use Nakagami-m fading with integer shape ``m`` and unit
mean power; ground-to-ground links use Rayleigh fading whose power gain is
exponential with mean ``2 * sigma_sq``.
"""

from dataclasses import dataclass
import math
import numbers

import numpy as np

from .errors import DomainError


def check_shape(m):
    """Validate a Nakagami shape and return it as ``int``.

    Only integer shapes are supported: the coverage expressions expand the
    upper incomplete gamma function as a finite sum.
    """
    if isinstance(m, bool):
        raise DomainError("Nakagami shape m must be an integer >= 1")
    if isinstance(m, numbers.Integral):
        m = int(m)
    elif isinstance(m, numbers.Real) and float(m).is_integer():
        m = int(m)
    else:
        raise DomainError(
            f"Nakagami shape m={m!r} is not an integer; only integer m is "
            "supported (non-integer shapes need a Rician/Gamma-mixture model)"
        )
    if m < 1:
        raise DomainError(f"Nakagami shape m={m} must be >= 1")
    return m


@dataclass(frozen=True)
class NakagamiParams:
    m: int = 2

    def __post_init__(self):
        object.__setattr__(self, "m", check_shape(self.m))


@dataclass(frozen=True)
class RayleighParams:
    sigma_sq: float = 0.5

    def __post_init__(self):
        if not self.sigma_sq > 0:
            raise DomainError(f"sigma_sq={self.sigma_sq} must be > 0")


def nakagami_power_ccdf(x, m):
    """Pr{h > x} for a unit-mean Nakagami-m power gain.

    Uses the finite expansion ``exp(-m x) * sum_{k<m} (m x)^k / k!``.
    Accepts scalars or arrays.
    """
    m = check_shape(m)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("power gain threshold must be >= 0")
    mx = m * x
    term = np.ones_like(mx)
    total = np.ones_like(mx)
    for k in range(1, m):
        term = term * mx / k
        total = total + term
    out = np.exp(-mx) * total
    return float(out) if out.ndim == 0 else out


def sample_nakagami_power(m, rng, size=None):
    """Draw Nakagami-m power gains as ``(1/m) * sum of m Exp(1) draws``."""
    m = check_shape(m)
    if size is None:
        return float(rng.standard_exponential(m).sum() / m)
    n = int(np.prod(size))
    if m == 1:
        out = rng.standard_exponential(n)
    else:
        out = rng.standard_exponential((n, m)).sum(axis=1) / m
    return out.reshape(size)


def rayleigh_power_ccdf(x, sigma_sq):
    """Pr{g > x} = exp(-x / (2 sigma_sq))."""
    if not sigma_sq > 0:
        raise DomainError(f"sigma_sq={sigma_sq} must be > 0")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("power gain threshold must be >= 0")
    out = np.exp(-x / (2.0 * sigma_sq))
    return float(out) if out.ndim == 0 else out


def sample_rayleigh_power(sigma_sq, rng, size=None):
    """Exponential power gains with mean ``2 * sigma_sq``."""
    if not sigma_sq > 0:
        raise DomainError(f"sigma_sq={sigma_sq} must be > 0")
    draw = rng.standard_exponential(size)
    return 2.0 * sigma_sq * draw


def gamma_bound_eta(m):
    """Constants of the incomplete-gamma sandwich for integer ``m >= 1``.

    Returns ``(eta1, eta2)`` with ``eta1 = 1`` and ``eta2 = (m!)^(-1/m)``;
    for ``x >= 0``::

        (1 - exp(-eta2 m x))^m <= gamma(m, m x) / Gamma(m) <= (1 - exp(-eta1 m x))^m

    Equality holds throughout for ``m = 1``.
    """
    m = check_shape(m)
    return 1.0, math.factorial(m) ** (-1.0 / m)
