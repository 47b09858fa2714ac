"""Problem definitions for ``-(p D^a u + q D^{a*} u) + d u' = h`` on (-1, 1).

Every problem is normalized to that form; examples stated differently
(one-sided ``D^a u = h``, fractional Laplacian) are mapped onto it here.
"""

from dataclasses import dataclass, field
import math
from typing import Callable, Optional

import numpy as np
from scipy.special import gamma

from .errors import ParameterError
from .fraccalc import Piece, Source, _Constant, manufactured_rhs

# manufactured solutions (1+x)^a (1-x)^b by catalog key
MANUFACTURED = {"u1": (4.0, 3.0), "u2": (2.0, 4.0), "u3": (4.0, 4.0)}


@dataclass(frozen=True)
class ProblemSpec:
    alpha: float
    p_bar: float
    q_bar: float
    d_bar: float
    rhs: Source
    exact: Optional[Callable] = None
    label: str = ""
    singular_exponents: tuple = (0.0, 0.0)
    kinks: tuple = ()
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        _check_alpha(self.alpha)
        if self.p_bar < 0 or self.q_bar < 0:
            raise ParameterError("diffusion weights must be nonnegative")
        if self.p_bar > 0 and self.q_bar > 0 and abs(self.p_bar + self.q_bar - 1.0) > 1e-12:
            raise ParameterError("two-sided weights must sum to 1")
        if not isinstance(self.rhs, Source):
            raise ParameterError("rhs must be a Source")


def _check_alpha(alpha):
    if not 0.0 < alpha < 2.0 or alpha == 1.0:
        raise ParameterError(f"alpha must lie in (0,1) or (1,2), got {alpha}")


def laplacian_problem(alpha, h):
    """``(-Delta)^{alpha/2} u = h`` rewritten two-sidedly.

    ``-(D^a u + D^{a*} u)/2 = -cos(pi alpha/2) h``; ``h`` is a Source or a constant.
    """
    if alpha == 1.0:
        raise ParameterError("the two-sided reduction degenerates at alpha = 1")
    _check_alpha(alpha)
    if not isinstance(h, Source):
        h = Source.constant(float(h))
    c = math.cos(0.5 * math.pi * alpha)
    return ProblemSpec(alpha, 0.5, 0.5, 0.0, h.scaled(-c), label="laplacian",
                       singular_exponents=(0.5 * alpha, 0.5 * alpha), kinks=h.kinks)


def getoor_constant(alpha):
    return 2.0 ** (-alpha) * math.sqrt(math.pi) / (gamma(0.5 * (1.0 + alpha)) * gamma(1.0 + 0.5 * alpha))


@dataclass(frozen=True)
class _Getoor:
    alpha: float

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = getoor_constant(self.alpha) * np.clip(1.0 - x * x, 0.0, None) ** (0.5 * self.alpha)
        return float(out) if out.ndim == 0 else out


def getoor_exact(alpha):
    """Solution of ``(-Delta)^{alpha/2} u = 1`` on (-1, 1), zero outside."""
    if not 0.0 < alpha < 2.0:
        raise ParameterError(f"alpha must lie in (0, 2), got {alpha}")
    return _Getoor(float(alpha))


def laplacian_const_problem(alpha):
    spec = laplacian_problem(alpha, 1.0)
    return ProblemSpec(alpha, 0.5, 0.5, 0.0, spec.rhs, getoor_exact(alpha), "laplacian-const",
                       (0.5 * alpha, 0.5 * alpha))


def _example1_pieces(shift):
    # (2 x_+^s - (1+x)^s) / Gamma(s + 1), s = 3 + shift
    s = 3.0 + shift
    g = 1.0 / gamma(4.0 + shift)
    return Source((Piece(_Constant(-g), -1.0, 1.0, s, 0.0),
                   Piece(_Constant(2.0 * g), 0.0, 1.0, s, 0.0)))


def example1_problem(alpha):
    """One-sided ``D^a u = h`` with a kink at 0 in both ``u`` and ``h``.

    ``u = (2 x_+^{3+a/2} - (1+x)^{3+a/2}) / Gamma(4+a/2)``; the source is the
    same with ``a/2`` replaced by ``-a/2``. Negated to fit the general form.
    """
    if not 1.0 < alpha < 2.0:
        raise ParameterError(f"example1 needs alpha in (1, 2), got {alpha}")
    h = _example1_pieces(-0.5 * alpha)
    exact = _example1_pieces(0.5 * alpha)
    return ProblemSpec(alpha, 1.0, 0.0, 0.0, h.scaled(-1.0), exact, "example1",
                       (0.0, 0.0), (0.0,))


@dataclass(frozen=True)
class _Product:
    a: float
    b: float

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = (1.0 + x) ** self.a * (1.0 - x) ** self.b
        return float(out) if out.ndim == 0 else out


def manufactured_problem(a_left, b_right, alpha, p_bar, q_bar, d_bar, label="manufactured"):
    """Exact solution ``(1+x)^a_left (1-x)^b_right`` with its exact source."""
    rhs = manufactured_rhs(a_left, b_right, alpha, p_bar, q_bar, d_bar)
    return ProblemSpec(alpha, p_bar, q_bar, d_bar, rhs, _Product(float(a_left), float(b_right)),
                       label, (float(a_left), float(b_right)))


def example3_problem(alpha, scheme):
    """Drifted two-sided problem with the solution matched to Scheme 1 or 2."""
    if scheme == 1:
        a = 5.0 + 0.5 * alpha
    elif scheme == 2:
        a = 5.0 + 0.5 * (alpha - 1.0)
    else:
        raise ParameterError("example3 is defined for schemes 1 and 2")
    return manufactured_problem(a, 5.0, alpha, 0.5, 0.5, 1.0, f"example3-s{scheme}")


def mfet_problem(alpha, d_bar=0.0):
    """Mean first exit time from (-1, 1), sign chosen so the solution is nonnegative.

    With ``p = q = 1/2`` and source ``cos(pi alpha/2)`` the equation is
    ``(-Delta)^{alpha/2} u - (d / cos(pi alpha/2)) u' = -1``; the source is
    negated so that ``u`` is the (nonnegative) exit time. At ``d = 0`` the
    solution is :func:`getoor_exact`.
    """
    if alpha == 1.0:
        raise ParameterError("the two-sided reduction degenerates at alpha = 1")
    _check_alpha(alpha)
    c = math.cos(0.5 * math.pi * alpha)
    exact = getoor_exact(alpha) if d_bar == 0.0 else None
    return ProblemSpec(alpha, 0.5, 0.5, float(d_bar), Source.constant(-c), exact, "mfet",
                       (0.5 * alpha, 0.5 * alpha))


CATALOG = ("example1", "laplacian-const", "example3-s1", "example3-s2",
           "manufactured-u1", "manufactured-u2", "manufactured-u3", "mfet")


def catalog_problem(label, alpha, d_bar=None):
    """Build a catalog problem by label.

    ``d_bar`` overrides the drift of ``mfet`` only (default 0).
    """
    if label == "example1":
        return example1_problem(alpha)
    if label == "laplacian-const":
        return laplacian_const_problem(alpha)
    if label in ("example3-s1", "example3-s2"):
        return example3_problem(alpha, int(label[-1]))
    if label.startswith("manufactured-"):
        key = label.split("-", 1)[1]
        if key not in MANUFACTURED:
            raise ParameterError(f"unknown problem label {label!r}")
        a, b = MANUFACTURED[key]
        return manufactured_problem(a, b, alpha, 0.5, 0.5, 1.0, label)
    if label == "mfet":
        return mfet_problem(alpha, 0.0 if d_bar is None else d_bar)
    raise ParameterError(f"unknown problem label {label!r}; choose from {', '.join(CATALOG)}")
