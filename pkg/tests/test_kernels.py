import math
import os
import subprocess
import sys

import numpy as np
import pytest

from hapnet import _kernels_py, kernels
from hapnet.antenna import AntennaPattern

try:
    from hapnet import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

needs_compiled = pytest.mark.skipif(_compiled is None, reason="compiled extension not built")


def hap_inputs(n, seed=0):
    rng = np.random.default_rng(seed)
    d2 = rng.uniform(4e8, 1.6e11, n)
    cb = rng.uniform(0.05, 1.0, n)
    return d2, cb, rng.exponential(size=n), rng.exponential(size=n)


def test_backend_flag():
    assert kernels.BACKEND in ("cython", "python")
    if _compiled is not None:
        assert kernels.BACKEND == "cython"


@pytest.mark.parametrize("half_alpha", [1.0, 1.5, 2.0])
@pytest.mark.parametrize("exponent", [1, 2])
def test_python_kernel_against_pattern(half_alpha, exponent):
    pat = AntennaPattern(math.radians(40.0), exponent)
    d2, cb, f1, f2 = hap_inputs(500)
    out = _kernels_py.hap_sums(d2, cb, f1, f2, half_alpha, True,
                               pat.g0_db, pat.theta_3db, exponent, pat.gsl_db)
    g = pat.gain(np.arccos(cb))
    p = d2 ** -half_alpha
    np.testing.assert_allclose(out, [f1 @ p, f1 @ (g * p), f2 @ p, f2 @ (g * p)], rtol=1e-12)


@needs_compiled
@pytest.mark.parametrize("half_alpha", [1.0, 1.5, 2.0])
@pytest.mark.parametrize("directional", [False, True])
def test_backends_agree_hap(half_alpha, directional):
    pat = AntennaPattern()
    d2, cb, f1, f2 = hap_inputs(2000, 3)
    args = (d2, cb, f1, f2, half_alpha, directional, pat.g0_db, pat.theta_3db, 2, pat.gsl_db)
    np.testing.assert_allclose(_compiled.hap_sums(*args), _kernels_py.hap_sums(*args), rtol=1e-12)


@needs_compiled
@pytest.mark.parametrize("half_alpha", [1.0, 2.0, 1.75])
def test_backends_agree_bs(half_alpha):
    rng = np.random.default_rng(1)
    rho = rng.uniform(1.0, 1e4, 3000)
    f1, f2 = rng.exponential(size=3000), rng.exponential(size=3000)
    np.testing.assert_allclose(_compiled.bs_sums(rho, f1, f2, half_alpha),
                               _kernels_py.bs_sums(rho, f1, f2, half_alpha), rtol=1e-12)


@pytest.mark.parametrize("impl", [_kernels_py, _compiled], ids=["python", "cython"])
def test_empty_fields(impl):
    if impl is None:
        pytest.skip("compiled extension not built")
    e = np.empty(0)
    assert tuple(impl.hap_sums(e, e, e, e, 1.0)) == (0.0, 0.0, 0.0, 0.0)
    assert tuple(impl.bs_sums(e, e, e, 2.0)) == (0.0, 0.0)


def test_pure_python_switch():
    out = subprocess.run([sys.executable, "-c", "import hapnet.kernels as k; print(k.BACKEND)"],
                         env={**os.environ, "HAPNET_PURE_PYTHON": "1"},
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
