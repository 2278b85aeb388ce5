"""Accelerated inner loops with a pure-Python fallback.

The one genuinely hot loop in this package is IIR difference-equation
filtering: the delay-approximation ISE scoring runs it over ~1e5 recursive
samples per series, and step/impulse responses reuse it everywhere. The
kernel is jitted with numba when available; set WNCS_NO_NUMBA=1 to force
the plain-Python path (compilation-free installs, debugging).

Everything event-driven (channel, estimator, closed-loop scenario) stays in
ordinary Python: those loops run ~1e3 iterations on dict/deque structures
and gain nothing from jitting.
"""

import os

import numpy as np

__all__ = ["run_difference_equation", "USING_NUMBA"]


def _kernel(b, a, u, y):
    # b, a normalized so a[0] == 1; y preallocated to u's length.
    nb = b.shape[0]
    na = a.shape[0]
    for k in range(u.shape[0]):
        acc = 0.0
        for i in range(min(nb, k + 1)):
            acc += b[i] * u[k - i]
        for i in range(1, min(na, k + 1)):
            acc -= a[i] * y[k - i]
        y[k] = acc


_kernel_python = _kernel

USING_NUMBA = False
if os.environ.get("WNCS_NO_NUMBA", "") != "1":
    try:
        from numba import njit
    except ImportError:
        pass
    else:
        _kernel = njit(cache=True)(_kernel_python)
        USING_NUMBA = True


def run_difference_equation(num, den, inputs, force_python=False):
    """Filter `inputs` through num/den (ascending powers of z^-1).

    Zero initial conditions. Coefficients are normalized so den[0] = 1
    before the recursion. Returns a float64 array the length of `inputs`.
    `force_python` bypasses the jitted kernel (used by tests and the
    benchmark to compare both paths).
    """
    b = np.asarray(num, dtype=np.float64)
    a = np.asarray(den, dtype=np.float64)
    if a.size == 0 or a[0] == 0.0:
        raise ValueError("denominator leading coefficient must be nonzero")
    b = b / a[0]
    a = a / a[0]
    u = np.ascontiguousarray(inputs, dtype=np.float64)
    y = np.empty_like(u)
    kernel = _kernel_python if force_python else _kernel
    kernel(b, a, u, y)
    return y
