"""Jacobi/Legendre polynomials and Gauss-type quadrature on [-1, 1].

Jacobi polynomials use the Rodrigues normalization, so
``P_n^{a,b}(1) = binom(n + a, n)``. Weight convention: ``(1-x)^a (1+x)^b``.
"""

from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln

from .errors import ParameterError
from .kernels import jacobi_table as _jacobi_table, legendre_table as _legendre_table


def _check_jacobi_params(sigma, eta):
    if not sigma > -1.0 or not eta > -1.0:
        raise ParameterError(
            f"Jacobi parameters must exceed -1, got sigma={sigma}, eta={eta}")


def jacobi_table(sigma, eta, nmax, x):
    """Evaluate ``P_0 .. P_nmax`` at every point of ``x``.

    Unlike :func:`jacobi_eval` the parameters are unrestricted reals: the
    fractional operators produce families such as ``J^{-1.2, 1.2}`` whose
    polynomials are still well defined by the recurrence. Degenerate
    parameter pairs (``sigma + eta`` a negative integer <= -2) are rejected.
    """
    ab = sigma + eta
    if ab <= -2 and float(ab).is_integer() and nmax >= 2:
        raise ParameterError(f"degenerate recurrence for sigma + eta = {ab}")
    if nmax < 0:
        raise ParameterError("nmax must be nonnegative")
    return _jacobi_table(float(sigma), float(eta), int(nmax), x)


def jacobi_eval(sigma, eta, n, x):
    """``J_n^{sigma,eta}(x)`` by the three-term recurrence.

    ``x`` may be a scalar or an array; the result has the same shape.
    """
    _check_jacobi_params(sigma, eta)
    if n < 0:
        raise ParameterError("degree must be nonnegative")
    xa = np.asarray(x, dtype=float)
    vals = jacobi_table(sigma, eta, n, xa.ravel())[n]
    if xa.ndim == 0:
        return float(vals[0])
    return vals.reshape(xa.shape)


def jacobi_deriv(sigma, eta, n, x):
    """First derivative of ``J_n^{sigma,eta}`` via the parameter-shift rule."""
    xa = np.asarray(x, dtype=float)
    if n == 0:
        out = np.zeros(xa.shape)
    else:
        out = 0.5 * (n + sigma + eta + 1.0) * jacobi_table(
            sigma + 1.0, eta + 1.0, n - 1, xa.ravel())[n - 1].reshape(xa.shape)
    return float(out) if xa.ndim == 0 else out


def legendre_table(nmax, x):
    return _legendre_table(int(nmax), x)


def legendre_eval(n, x):
    xa = np.asarray(x, dtype=float)
    vals = _legendre_table(int(n), xa.ravel())[n]
    if xa.ndim == 0:
        return float(vals[0])
    return vals.reshape(xa.shape)


def legendre_deriv(n, x):
    return jacobi_deriv(0.0, 0.0, n, x)


def legendre_norm(n):
    """Squared L2 norm of ``L_n`` on [-1, 1]."""
    n = np.asarray(n)
    out = 2.0 / (2.0 * n + 1.0)
    return float(out) if out.ndim == 0 else out


def weight_integral(sigma, eta):
    """Integral of ``(1-x)^sigma (1+x)^eta`` over [-1, 1]."""
    _check_jacobi_params(sigma, eta)
    return math.exp((sigma + eta + 1.0) * math.log(2.0) + gammaln(sigma + 1.0)
                    + gammaln(eta + 1.0) - gammaln(sigma + eta + 2.0))


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss rule for the weight ``(1-x)^sigma (1+x)^eta`` on [-1, 1].

    ``kind`` is ``"plain"`` (Legendre weight) or ``"jacobi"``.
    """

    kind: str
    sigma: float
    eta: float
    nodes: np.ndarray
    weights: np.ndarray
    exactness_degree: int

    @property
    def size(self):
        return self.nodes.size

    def integrate(self, values):
        """Apply the rule to function values sampled at ``nodes``.

        ``values`` may carry leading axes; the last axis must match the
        node count.
        """
        return np.asarray(values) @ self.weights

    def mapped(self, lo, hi):
        """Nodes and weights for ``(hi-x)^sigma (x-lo)^eta`` on ``[lo, hi]``."""
        half = 0.5 * (hi - lo)
        x = lo + half * (self.nodes + 1.0)
        w = self.weights * half ** (1.0 + self.sigma + self.eta)
        return x, w


def _jacobi_recurrence_coeffs(a, b, m):
    n = np.arange(m, dtype=float)
    c = 2.0 * n + a + b
    with np.errstate(invalid="ignore", divide="ignore"):
        diag = (b * b - a * a) / (c * (c + 2.0))
    diag[0] = (b - a) / (a + b + 2.0)
    k = np.arange(1, m, dtype=float)
    ck = 2.0 * k + a + b
    with np.errstate(invalid="ignore", divide="ignore"):
        off2 = 4.0 * k * (k + a) * (k + b) * (k + a + b) / (ck * ck * (ck + 1.0) * (ck - 1.0))
    if m > 1:
        off2[0] = 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b) ** 2 * (3.0 + a + b))
    return diag, np.sqrt(off2)


@lru_cache(maxsize=512)
def _gauss_jacobi_cached(a, b, m):
    if m == 1:
        nodes = np.array([(b - a) / (a + b + 2.0)])
        weights = np.array([weight_integral(a, b)])
    else:
        diag, off = _jacobi_recurrence_coeffs(a, b, m)
        nodes = eigh_tridiagonal(diag, off, eigvals_only=True)
        # Newton polish on P_m; the eigensolver alone leaves ~1e-15 * m residuals
        for _ in range(2):
            pm = jacobi_table(a, b, m, nodes)[m]
            dpm = 0.5 * (m + a + b + 1.0) * jacobi_table(a + 1.0, b + 1.0, m - 1, nodes)[m - 1]
            nodes = nodes - pm / dpm
        dpm = 0.5 * (m + a + b + 1.0) * jacobi_table(a + 1.0, b + 1.0, m - 1, nodes)[m - 1]
        logc = ((a + b + 1.0) * math.log(2.0) + gammaln(m + a + 1.0) + gammaln(m + b + 1.0)
                - gammaln(m + a + b + 1.0) - gammaln(m + 1.0))
        weights = np.exp(logc) / ((1.0 - nodes) * (1.0 + nodes) * dpm * dpm)
        order = np.argsort(nodes)
        nodes, weights = nodes[order], weights[order]
    nodes.setflags(write=False)
    weights.setflags(write=False)
    kind = "plain" if a == 0.0 and b == 0.0 else "jacobi"
    return QuadratureRule(kind, a, b, nodes, weights, 2 * m - 1)


def gauss_jacobi_rule(sigma, eta, m):
    """``m``-point Gauss rule for the weight ``(1-x)^sigma (1+x)^eta``.

    Nodes come from the symmetric Jacobi matrix (Golub-Welsch), polished by
    Newton steps; weights from the closed-form Christoffel numbers.
    """
    _check_jacobi_params(sigma, eta)
    if int(m) != m or m < 1:
        raise ParameterError(f"number of points must be a positive integer, got {m}")
    return _gauss_jacobi_cached(float(sigma), float(eta), int(m))


def gauss_rule(m):
    """``m``-point Gauss-Legendre rule."""
    return gauss_jacobi_rule(0.0, 0.0, m)


def points_for_degree(degree, slack=2):
    """Rule size that integrates polynomials of ``degree`` exactly, plus slack."""
    return max(1, math.ceil((degree + 1) / 2) + slack)
