"""Pure-NumPy aggregate-interference kernels (fallback for the compiled core).

``hap_sums`` returns, for one realisation of a HAP field,
``(sum f1 d^-a, sum f1 G d^-a, sum f2 d^-a, sum f2 G d^-a)`` where ``d2`` are
squared link distances, ``half_alpha = a / 2``, ``f1, f2`` two independent
fading sets (one per receiver) and ``G`` the linear directional gain at the
off-axis angle ``arccos(cos_beta)``.  Without ``directional`` the gain is one.

``bs_sums`` returns ``(sum f1 rho^-a, sum f2 rho^-a)`` over BS distances ``rho``.
"""

import numpy as np

LN10_OVER_10 = 0.23025850929940458


def _inv_power(d2, half_alpha):
    if half_alpha == 1.0:
        return 1.0 / d2
    if half_alpha == 2.0:
        return 1.0 / (d2 * d2)
    return d2 ** -half_alpha


def _check(*arrays):
    n = arrays[0].shape[0]
    if any(a.shape[0] != n for a in arrays):
        raise ValueError("input arrays must have equal length")


def hap_sums(d2, cos_beta, fad1, fad2, half_alpha, directional=False,
             g0_db=0.0, theta_3db=1.0, exponent=2, gsl_db=0.0):
    _check(d2, cos_beta, fad1, fad2)
    p = _inv_power(d2, half_alpha)
    s1 = float(np.dot(fad1, p))
    s2 = float(np.dot(fad2, p))
    if not directional:
        return s1, s1, s2, s2
    beta = np.arccos(cos_beta)
    x = 2.0 * beta / theta_3db
    if exponent == 2:
        x = x * x
    db = np.where(beta <= 1.3 * theta_3db, g0_db - 3.01 * x, gsl_db)
    g = np.exp(db * LN10_OVER_10) * p
    return s1, float(np.dot(fad1, g)), s2, float(np.dot(fad2, g))


def bs_sums(rho, fad1, fad2, half_alpha):
    _check(rho, fad1, fad2)
    p = _inv_power(rho * rho, half_alpha)
    return float(np.dot(fad1, p)), float(np.dot(fad2, p))
