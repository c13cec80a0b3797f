# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled aggregate-interference kernels.

Same contract as :mod:`hapnet._kernels_py`; see there for the formulas.
The path-loss loops are specialised for ``half_alpha`` 1 and 2 so the
compiler can vectorise them; the directional pass evaluates ``acos`` and
``exp`` only inside the main lobe.
"""

from libc.math cimport acos, cos, exp, pow

cdef double LN10_OVER_10 = 0.23025850929940458


cdef void _path_loss(const double* d2, double* out, Py_ssize_t n, double half_alpha) noexcept nogil:
    cdef Py_ssize_t i
    if half_alpha == 1.0:
        for i in range(n):
            out[i] = 1.0 / d2[i]
    elif half_alpha == 2.0:
        for i in range(n):
            out[i] = 1.0 / (d2[i] * d2[i])
    else:
        for i in range(n):
            out[i] = pow(d2[i], -half_alpha)


cdef void _dot2(const double* p, const double* f1, const double* f2, Py_ssize_t n,
                double* s1, double* s2) noexcept nogil:
    cdef Py_ssize_t i
    cdef double a = 0.0, b = 0.0
    for i in range(n):
        a += f1[i] * p[i]
        b += f2[i] * p[i]
    s1[0] = a
    s2[0] = b


def hap_sums(const double[::1] d2, const double[::1] cos_beta,
             const double[::1] fad1, const double[::1] fad2,
             double half_alpha, bint directional=False,
             double g0_db=0.0, double theta_3db=1.0, int exponent=2,
             double gsl_db=0.0):
    cdef Py_ssize_t i, n = d2.shape[0]
    cdef double s1 = 0.0, s1g = 0.0, s2 = 0.0, s2g = 0.0, x
    # beta <= edge  <=>  cos(beta) >= cos(edge); the side-lobe gain is constant
    cdef double cos_edge = cos(1.3 * theta_3db)
    cdef double g_sl = exp(gsl_db * LN10_OVER_10)
    cdef double g_peak = exp(g0_db * LN10_OVER_10)
    cdef double slope = -3.01 * LN10_OVER_10
    cdef double scale = 2.0 / theta_3db
    if cos_beta.shape[0] != n or fad1.shape[0] != n or fad2.shape[0] != n:
        raise ValueError("input arrays must have equal length")
    if n == 0:
        return 0.0, 0.0, 0.0, 0.0
    cdef double[::1] p = _scratch(n)
    cdef double[::1] g
    with nogil:
        _path_loss(&d2[0], &p[0], n, half_alpha)
        _dot2(&p[0], &fad1[0], &fad2[0], n, &s1, &s2)
    if not directional:
        return s1, s1, s2, s2
    g = _scratch(n)
    with nogil:
        for i in range(n):
            g[i] = g_sl * p[i]
        for i in range(n):
            if cos_beta[i] >= cos_edge:
                x = scale * acos(cos_beta[i])
                if exponent == 2:
                    x = x * x
                g[i] = g_peak * exp(slope * x) * p[i]
        _dot2(&g[0], &fad1[0], &fad2[0], n, &s1g, &s2g)
    return s1, s1g, s2, s2g


def bs_sums(const double[::1] rho, const double[::1] fad1, const double[::1] fad2,
            double half_alpha):
    cdef Py_ssize_t i, n = rho.shape[0]
    cdef double s1 = 0.0, s2 = 0.0
    if fad1.shape[0] != n or fad2.shape[0] != n:
        raise ValueError("input arrays must have equal length")
    if n == 0:
        return 0.0, 0.0
    cdef double[::1] p = _scratch(n)
    with nogil:
        for i in range(n):
            p[i] = rho[i] * rho[i]
        _path_loss(&p[0], &p[0], n, half_alpha)
        _dot2(&p[0], &fad1[0], &fad2[0], n, &s1, &s2)
    return s1, s2


cdef double[::1] _scratch(Py_ssize_t n):
    import numpy
    return numpy.empty(n, dtype=numpy.float64)
