"""Pure-numpy fallback for the compiled recurrence kernels."""

import numpy as np


def jacobi_table(a, b, nmax, x):
    """Values of P_0..P_nmax with parameters (a, b) at the points ``x``.

    Returns an array of shape ``(nmax + 1, len(x))``.
    """
    x = np.ascontiguousarray(x, dtype=float).ravel()
    out = np.empty((nmax + 1, x.size))
    out[0] = 1.0
    if nmax == 0:
        return out
    ab = a + b
    out[1] = 0.5 * ((a - b) + (ab + 2.0) * x)
    for n in range(2, nmax + 1):
        c = 2.0 * n + ab
        a1 = 2.0 * n * (n + ab) * (c - 2.0)
        a2 = (c - 1.0) * (a * a - b * b)
        a3 = (c - 2.0) * (c - 1.0) * c
        a4 = 2.0 * (n + a - 1.0) * (n + b - 1.0) * c
        out[n] = ((a2 + a3 * x) * out[n - 1] - a4 * out[n - 2]) / a1
    return out


def legendre_table(nmax, x):
    x = np.ascontiguousarray(x, dtype=float).ravel()
    out = np.empty((nmax + 1, x.size))
    out[0] = 1.0
    if nmax == 0:
        return out
    out[1] = x
    for n in range(2, nmax + 1):
        out[n] = ((2 * n - 1) * x * out[n - 1] - (n - 1) * out[n - 2]) / n
    return out
