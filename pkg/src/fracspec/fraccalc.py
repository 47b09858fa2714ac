"""Closed-form fractional calculus on generalized Jacobi functions and power sums.

Two exact representations are supported:

* :class:`GJF` -- ``c (1 +- x)^mu J_n^{sigma,eta}(x)``, closed under the
  left/right Riemann-Liouville integrals when the boundary exponent matches
  the Jacobi parameter on the same side.
* :class:`PowerSum` -- ``sum_i c_i (1 +- x)^{s_i}``, closed under the same
  operators term by term.

Operators follow the convention ``D^g = D I^{n-g} D^{n-1}`` (left) and
``D^{g*} = (-1)^n D xI^{n-g} D^{n-1}`` (right), ``n = ceil(g)``. Signed orders
treat a negative order as a derivative of the absolute order.
"""

from dataclasses import dataclass, field
import math
from typing import Callable

import numpy as np
from scipy.special import binom, gammaln, gammasgn, poch

from .errors import ParameterError, ShapeError, SingularityError, StructuralError
from .orthopoly import gauss_jacobi_rule, jacobi_table

LEFT = "left"
RIGHT = "right"
SIDES = (LEFT, RIGHT)
MERGE_TOL = 1e-12
MAX_ORDER = 4.0


def _check_side(side):
    if side not in SIDES:
        raise ParameterError(f"side must be 'left' or 'right', got {side!r}")


def _is_pole(z):
    z = np.asarray(z, dtype=float)
    return (z <= 0) & (z == np.floor(z))


def gamma_ratio(a, b):
    """``Gamma(a) / Gamma(b)`` through log-Gamma differences.

    Returns 0 where ``b`` is a pole; raises where ``a`` is.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(_is_pole(a)):
        raise SingularityError(f"Gamma pole in numerator at {a[_is_pole(a)]}")
    b_pole = _is_pole(b)
    bb = np.where(b_pole, 0.5, b)
    out = gammasgn(a) * gammasgn(bb) * np.exp(gammaln(a) - gammaln(bb))
    out = np.where(b_pole, 0.0, out)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class FracOrder:
    """Signed operator order: positive integrates, negative differentiates."""

    value: float

    def __post_init__(self):
        if not abs(self.value) < MAX_ORDER:
            raise ParameterError(f"|order| must be below {MAX_ORDER}, got {self.value}")

    @property
    def kind(self):
        if self.value > 0:
            return "integral"
        if self.value < 0:
            return "derivative"
        return "identity"

    def __neg__(self):
        return FracOrder(-self.value)

    def __add__(self, other):
        return FracOrder(self.value + _order_value(other))

    def __float__(self):
        return float(self.value)


def _order_value(order):
    return order.value if isinstance(order, FracOrder) else float(order)


# --------------------------------------------------------------------------
# generalized Jacobi functions

@dataclass(frozen=True)
class GJF:
    """``coeff * (1+x)^mu J_n^{sigma,eta}`` (left) or ``coeff * (1-x)^mu J_n^{sigma,eta}`` (right)."""

    side: str
    coeff: float
    mu: float
    sigma: float
    eta: float
    n: int

    def __post_init__(self):
        _check_side(self.side)
        if not self.mu > -1.0:
            raise SingularityError(f"boundary exponent {self.mu} is not integrable")
        if self.n < 0:
            raise ParameterError("degree must be nonnegative")

    @property
    def compatible(self):
        """Whether the closed-form integral/derivative rules apply."""
        if self.side == LEFT:
            return abs(self.eta - self.mu) <= MERGE_TOL
        return abs(self.sigma - self.mu) <= MERGE_TOL

    def __call__(self, x):
        return eval_gjf(self, x)


def legendre_gjf(n, side=LEFT, coeff=1.0):
    """``L_n`` as a compatible GJF with zero boundary exponent."""
    return GJF(side, coeff, 0.0, 0.0, 0.0, n)


def _require_compatible(g):
    if not g.compatible:
        raise StructuralError(
            f"{g.side} GJF with mu={g.mu}, sigma={g.sigma}, eta={g.eta} is not operator-compatible")


def frac_integrate_gjf(g, rho):
    """Riemann-Liouville integral of order ``rho`` on the GJF's own side."""
    if not rho > 0:
        raise ParameterError(f"integration order must be positive, got {rho}")
    _require_compatible(g)
    c = g.coeff * gamma_ratio(g.n + g.mu + 1.0, g.n + g.mu + rho + 1.0)
    if g.side == LEFT:
        return GJF(LEFT, c, g.mu + rho, g.sigma - rho, g.eta + rho, g.n)
    return GJF(RIGHT, c, g.mu + rho, g.sigma + rho, g.eta - rho, g.n)


def frac_derive_gjf(g, rho):
    """Fractional derivative of order ``rho``; inverse of :func:`frac_integrate_gjf`."""
    if not rho > 0:
        raise ParameterError(f"derivative order must be positive, got {rho}")
    _require_compatible(g)
    if not g.mu - rho > -1.0:
        raise SingularityError(
            f"derivative of order {rho} leaves exponent {g.mu - rho} (not integrable)")
    c = g.coeff * gamma_ratio(g.n + g.mu + 1.0, g.n + g.mu - rho + 1.0)
    if g.side == LEFT:
        return GJF(LEFT, c, g.mu - rho, g.sigma + rho, g.eta - rho, g.n)
    return GJF(RIGHT, c, g.mu - rho, g.sigma - rho, g.eta + rho, g.n)


def apply_signed(g, order):
    value = _order_value(FracOrder(_order_value(order)))
    if value > 0:
        return frac_integrate_gjf(g, value)
    if value < 0:
        return frac_derive_gjf(g, -value)
    return g


def _boundary_factor(side, x, mu):
    base = 1.0 + x if side == LEFT else 1.0 - x
    if mu < 0 and np.any(base <= 0):
        raise SingularityError(f"evaluation at the {side} endpoint with exponent {mu}")
    with np.errstate(divide="ignore"):
        return base ** mu


def eval_gjf(g, x):
    xa = np.asarray(x, dtype=float)
    vals = jacobi_table(g.sigma, g.eta, g.n, xa.ravel())[g.n].reshape(xa.shape)
    out = g.coeff * _boundary_factor(g.side, xa, g.mu) * vals
    return float(out) if xa.ndim == 0 else out


def integrated_legendre_table(side, order, nmax, x, base=None):
    """Rows ``n = 0..nmax`` of ``I^order L_n`` (signed order) on ``side`` at ``x``.

    Vectorized form of ``apply_signed(legendre_gjf(n, side), order)``.
    ``base`` optionally supplies ``1 + x`` (left) or ``1 - x`` (right)
    computed without cancellation, for points very close to the endpoint.
    """
    rho = _order_value(order)
    x = np.asarray(x, dtype=float).ravel()
    n = np.arange(nmax + 1, dtype=float)
    scale = gamma_ratio(n + 1.0, n + 1.0 + rho)
    if side == LEFT:
        table = jacobi_table(-rho, rho, nmax, x)
    else:
        _check_side(side)
        table = jacobi_table(rho, -rho, nmax, x)
    if base is None:
        factor = _boundary_factor(side, x, rho)
    else:
        factor = np.asarray(base, dtype=float).ravel() ** rho
    return scale[:, None] * factor[None, :] * table


# --------------------------------------------------------------------------
# power sums

def _canonical_terms(terms):
    items = sorted((float(s), float(c)) for c, s in terms)
    merged = []
    for s, c in items:
        if merged and abs(s - merged[-1][0]) <= MERGE_TOL:
            merged[-1][1] += c
        else:
            merged.append([s, c])
    return tuple((c, s) for s, c in merged if c != 0.0)


@dataclass(frozen=True)
class PowerSum:
    """``sum_i c_i (1+x)^{s_i}`` (left) or ``sum_i c_i (1-x)^{s_i}`` (right)."""

    side: str
    terms: tuple = field(default=())

    def __post_init__(self):
        _check_side(self.side)
        terms = _canonical_terms(self.terms)
        for c, s in terms:
            if not s > -1.0:
                raise SingularityError(f"exponent {s} is not integrable")
        object.__setattr__(self, "terms", terms)

    @property
    def exponents(self):
        return tuple(s for _, s in self.terms)

    @property
    def coeffs(self):
        return tuple(c for c, _ in self.terms)

    def __call__(self, x):
        return eval_powersum(self, x)

    def __add__(self, other):
        if other.side != self.side:
            raise StructuralError("cannot add power sums on different sides")
        return PowerSum(self.side, self.terms + other.terms)

    def __neg__(self):
        return self.scaled(-1.0)

    def scaled(self, factor):
        return PowerSum(self.side, tuple((factor * c, s) for c, s in self.terms))

    def is_zero(self):
        return not self.terms


def eval_powersum(p, x):
    xa = np.asarray(x, dtype=float)
    out = np.zeros(xa.shape)
    for c, s in p.terms:
        out = out + c * _boundary_factor(p.side, xa, s)
    return float(out) if xa.ndim == 0 else out


def frac_integrate_power(p, rho):
    """Riemann-Liouville integral of order ``rho`` on the power sum's side."""
    if not rho > 0:
        raise ParameterError(f"integration order must be positive, got {rho}")
    return PowerSum(p.side, tuple(
        (c * gamma_ratio(s + 1.0, s + 1.0 + rho), s + rho) for c, s in p.terms))


def classical_derivative_power(p):
    """First classical derivative ``d/dx`` of a power sum."""
    sign = 1.0 if p.side == LEFT else -1.0
    terms = []
    for c, s in p.terms:
        if s == 0.0:
            continue
        if not s - 1.0 > -1.0:
            raise SingularityError(f"d/dx of exponent {s} is not integrable")
        terms.append((sign * c * s, s - 1.0))
    return PowerSum(p.side, tuple(terms))


def rl_derivative_power(p, alpha):
    """``D^alpha`` (left) or ``D^{alpha*}`` (right) of a power sum.

    Realized as the composition ``D I^{n-alpha} D^{n-1}`` with the sign
    ``(-1)^n`` on the right, ``n = ceil(alpha)``. Only non-integer
    ``alpha`` in (0, 2) is accepted; use :func:`classical_derivative_power`
    for ``alpha = 1``.
    """
    if not 0.0 < alpha < 2.0 or alpha == 1.0:
        raise ParameterError(f"alpha must lie in (0,1) or (1,2), got {alpha}")
    n = math.ceil(alpha)
    q = p
    for _ in range(n - 1):
        q = classical_derivative_power(q)
    if q.is_zero():
        return q
    q = classical_derivative_power(frac_integrate_power(q, n - alpha))
    return q.scaled((-1.0) ** n) if p.side == RIGHT else q


def apply_signed_power(p, order):
    value = _order_value(FracOrder(_order_value(order)))
    if value > 0:
        return frac_integrate_power(p, value)
    if value < 0:
        return rl_derivative_power(p, -value)
    return p


def _jacobi_series_coeffs(a, b, n):
    """``P_n^{a,b}(x) = sum_m c_m ((1-x)/2)^m`` (hypergeometric form)."""
    m = np.arange(n + 1, dtype=float)
    return (poch(a + 1.0 + m, n - m) / math.factorial(n)
            * poch(-float(n), m) * poch(n + a + b + 1.0, m) / np.array(
                [math.factorial(k) for k in range(n + 1)], dtype=float))


def gjf_to_powersum(g):
    """Expand a GJF into an exact power sum on its own side."""
    if g.side == RIGHT:
        c = _jacobi_series_coeffs(g.sigma, g.eta, g.n)
    else:
        c = (-1.0) ** g.n * _jacobi_series_coeffs(g.eta, g.sigma, g.n)
    terms = tuple((g.coeff * cm * 0.5 ** m, g.mu + m) for m, cm in enumerate(c))
    return PowerSum(g.side, terms)


def mixed_power_to_side(c, left_exp, right_exp, target_side):
    """Rewrite ``c (1+x)^left_exp (1-x)^right_exp`` as a power sum on ``target_side``.

    The exponent on the other side must be a nonnegative integer so the
    binomial expansion of ``(1-x)^b = (2 - (1+x))^b`` terminates.
    """
    _check_side(target_side)
    keep, expand = (left_exp, right_exp) if target_side == LEFT else (right_exp, left_exp)
    if expand < 0 or not float(expand).is_integer():
        raise ShapeError(
            f"opposite-side exponent {expand} must be a nonnegative integer")
    b = int(expand)
    terms = tuple((c * binom(b, j) * 2.0 ** (b - j) * (-1.0) ** j, keep + j)
                  for j in range(b + 1))
    return PowerSum(target_side, terms)


# --------------------------------------------------------------------------
# evaluable sources with declared singular structure

@dataclass(frozen=True)
class Piece:
    """``(x - lo)^lo_exp (hi - x)^hi_exp g(x)`` on ``[lo, hi]``, zero elsewhere.

    ``g`` should be smooth on the closed interval; the exponents tell the
    quadrature which weight absorbs the endpoint behaviour.
    """

    smooth: Callable
    lo: float = -1.0
    hi: float = 1.0
    lo_exp: float = 0.0
    hi_exp: float = 0.0

    def mask(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x > self.lo) & (x <= self.hi)
        if self.lo == -1.0:
            inside |= x == self.lo
        return inside

    def __call__(self, x):
        xa = np.asarray(x, dtype=float)
        inside = self.mask(xa)
        out = np.zeros(xa.shape)
        if np.any(inside):
            xi = xa[inside]
            with np.errstate(divide="ignore", invalid="ignore"):
                out[inside] = ((xi - self.lo) ** self.lo_exp * (self.hi - xi) ** self.hi_exp
                               * np.asarray(self.smooth(xi), dtype=float))
        return float(out) if xa.ndim == 0 else out


@dataclass(frozen=True)
class Source:
    """Finite sum of :class:`Piece` objects; evaluable on [-1, 1]."""

    pieces: tuple = ()

    def __call__(self, x):
        xa = np.asarray(x, dtype=float)
        out = np.zeros(xa.shape)
        for piece in self.pieces:
            out = out + piece(xa)
        return float(out) if xa.ndim == 0 else out

    def __add__(self, other):
        return Source(self.pieces + other.pieces)

    def scaled(self, factor):
        if factor == 1.0:
            return self
        return Source(tuple(
            Piece(_Scaled(factor, p.smooth), p.lo, p.hi, p.lo_exp, p.hi_exp)
            for p in self.pieces))

    @property
    def kinks(self):
        pts = {p.lo for p in self.pieces} | {p.hi for p in self.pieces}
        return tuple(sorted(pt for pt in pts if -1.0 < pt < 1.0))

    @classmethod
    def from_callable(cls, f, lo_exp=0.0, hi_exp=0.0):
        return cls((Piece(f, -1.0, 1.0, lo_exp, hi_exp),))

    @classmethod
    def constant(cls, value):
        return cls((Piece(_Constant(float(value))),))

    @classmethod
    def from_powersum(cls, p, scale=1.0):
        if p.is_zero():
            return cls()
        base = min(p.exponents)
        smooth = _ShiftedPowerSum(p, base, scale)
        if p.side == LEFT:
            return cls((Piece(smooth, lo_exp=base),))
        return cls((Piece(smooth, hi_exp=base),))


# small picklable callables (the CLI sweep may run in worker processes)

@dataclass(frozen=True)
class _Constant:
    value: float

    def __call__(self, x):
        return np.full(np.shape(x), self.value)


@dataclass(frozen=True)
class _Scaled:
    factor: float
    inner: Callable

    def __call__(self, x):
        return self.factor * np.asarray(self.inner(x), dtype=float)


@dataclass(frozen=True)
class _ShiftedPowerSum:
    p: PowerSum
    base: float
    scale: float = 1.0

    def __call__(self, x):
        b = 1.0 + np.asarray(x, dtype=float) if self.p.side == LEFT else 1.0 - np.asarray(x, dtype=float)
        out = np.zeros(np.shape(b))
        for c, s in self.p.terms:
            out = out + c * b ** (s - self.base)
        return self.scale * out


@dataclass(frozen=True)
class _Polynomial:
    """``sum_k c_k x^k`` (numpy ascending coefficients)."""

    coeffs: tuple

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), self.coeffs)


def _falling(a, k):
    out = 1.0
    for i in range(k):
        out *= a - i
    return out


def _leibniz_terms(a, b, n):
    """``D^n [(1+x)^a (1-x)^b]`` as ``[(coef, left_exp, right_exp), ...]``."""
    terms = []
    for j in range(n + 1):
        c = binom(n, j) * _falling(a, j) * (-1.0) ** (n - j) * _falling(b, n - j)
        if c != 0.0:
            terms.append((c, a - j, b - (n - j)))
    return terms


@dataclass(frozen=True)
class _CrossedRight:
    """Smooth factor of ``D^{alpha*}[(1+x)^a (1-x)^b] / (1-x)^(b-alpha)``.

    Uses ``D^{alpha*} u = (-1)^n xI^{n-alpha}[D^n u]``, valid when
    ``D^j u(1) = 0`` for ``j < n``; the integral is taken with a Gauss-Jacobi
    rule on ``[x, 1]`` absorbing the kernel singularity.
    """

    a: float
    b: float
    alpha: float
    npts: int = 80

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        n = math.ceil(self.alpha)
        r = n - self.alpha
        rule = gauss_jacobi_rule(0.0, r - 1.0, self.npts)
        t = rule.nodes
        xs = x.ravel()[:, None]
        s = xs + (1.0 - xs) * (1.0 + t[None, :]) / 2.0
        acc = np.zeros(s.shape)
        for c, le, re in _leibniz_terms(self.a, self.b, n):
            extra = re - (self.b - n)
            acc += c * (1.0 + s) ** le * (1.0 - xs) ** extra * ((1.0 - t[None, :]) / 2.0) ** re
        vals = (acc @ rule.weights) * 2.0 ** (-r) / math.gamma(r) * (-1.0) ** n
        return vals.reshape(x.shape)


@dataclass(frozen=True)
class _Reflected:
    inner: Callable

    def __call__(self, x):
        return self.inner(-np.asarray(x, dtype=float))


def one_sided_operator(a, b, alpha, side):
    """``D^alpha`` (left) or ``D^{alpha*}`` (right) of ``(1+x)^a (1-x)^b`` as a :class:`Source`.

    Exact power calculus when the exponent opposite to ``side`` is a
    nonnegative integer; otherwise a quadrature evaluation of the
    one-sided integral, which needs the function to vanish to order
    ``ceil(alpha)`` at the far endpoint.
    """
    _check_side(side)
    near, far = (a, b) if side == LEFT else (b, a)
    if far >= 0 and float(far).is_integer():
        return Source.from_powersum(rl_derivative_power(mixed_power_to_side(1.0, a, b, side), alpha))
    n = math.ceil(alpha)
    if not near >= 0 or not far > n - 1:
        raise ShapeError(
            f"(1+x)^{a} (1-x)^{b}: no closed form or vanishing far end for order {alpha} on the {side}")
    if side == RIGHT:
        return Source((Piece(_CrossedRight(a, b, alpha), hi_exp=b - alpha),))
    return Source((Piece(_Reflected(_CrossedRight(b, a, alpha)), lo_exp=a - alpha),))


def classical_derivative_source(a, b):
    """``d/dx [(1+x)^a (1-x)^b]`` as a single-piece :class:`Source`."""
    if a == 0.0 and b == 0.0:
        return Source()
    if a == 0.0:
        return Source((Piece(_Constant(-b), hi_exp=b - 1.0),))
    if b == 0.0:
        return Source((Piece(_Constant(a), lo_exp=a - 1.0),))
    # a (1-x) - b (1+x) = (a - b) - (a + b) x
    return Source((Piece(_Polynomial((a - b, -(a + b))), lo_exp=a - 1.0, hi_exp=b - 1.0),))


def manufactured_rhs(left_exp, right_exp, alpha, p_bar, q_bar, d_bar):
    """Source ``h = -(p D^a u + q D^{a*} u) + d u'`` for ``u = (1+x)^left_exp (1-x)^right_exp``."""
    if not left_exp >= 0 or not right_exp >= 0:
        raise ShapeError("manufactured solutions need nonnegative exponents")
    out = Source()
    if p_bar != 0.0:
        out = out + one_sided_operator(left_exp, right_exp, alpha, LEFT).scaled(-p_bar)
    if q_bar != 0.0:
        out = out + one_sided_operator(left_exp, right_exp, alpha, RIGHT).scaled(-q_bar)
    if d_bar != 0.0:
        out = out + classical_derivative_source(left_exp, right_exp).scaled(d_bar)
    return out
