"""Dense linear systems of the three spectral schemes.

Scheme 1 (Galerkin) uses trial functions ``I^b L_n`` with ``b = alpha/2``;
Scheme 2 (Petrov-Galerkin) and Scheme 3 (mixed) use ``b = (alpha-1)/2``,
which is a fractional derivative when ``alpha < 1``. The right-sided
diffusion term is coupled to the left coefficients through collocation at
Gauss-Legendre nodes: ``A^L u^L = A^R u^R``.
"""

from dataclasses import dataclass, field
import enum
import math

import numpy as np
import scipy.linalg as sla

from .errors import AssemblyError, ParameterError
from .fraccalc import (LEFT, RIGHT, FracOrder, Source, gamma_ratio,
                       integrated_legendre_table)
from .orthopoly import gauss_jacobi_rule, gauss_rule, jacobi_table, legendre_norm, legendre_table

LOAD_SLACK = 32
SINGULAR_RCOND = 1e-14


class SchemeId(enum.Enum):
    GALERKIN1 = 1
    PETROV_GALERKIN2 = 2
    MIXED3 = 3

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        for s in cls:
            if key in (str(s.value), s.name.lower()):
                return s
        raise ParameterError(f"unknown scheme {value!r}; use 1, 2 or 3")

    def trial_order(self, alpha):
        if self is SchemeId.GALERKIN1:
            return 0.5 * alpha
        return 0.5 * (alpha - 1.0)

    def test_order(self, alpha):
        """Right integral order of the test functions ``(1+x) xI^r L_k`` (Schemes 1, 2)."""
        if self is SchemeId.GALERKIN1:
            return 0.5 * alpha
        if self is SchemeId.PETROV_GALERKIN2:
            return 0.5 * (alpha + 1.0)
        raise ParameterError("the mixed scheme has no weighted test functions")


@dataclass(frozen=True)
class AssembledSystem:
    scheme: SchemeId
    alpha: float
    N: int
    stiffness: np.ndarray
    load: np.ndarray
    trial_order: FracOrder
    nodes: np.ndarray
    coefficients: tuple = (1.0, 0.0, 0.0)
    blocks: dict = field(default_factory=dict, repr=False, compare=False)


def _check_alpha(scheme, alpha):
    if not 0.0 < alpha < 2.0:
        raise ParameterError(f"alpha must lie in (0, 2), got {alpha}")
    if scheme is not SchemeId.GALERKIN1 and alpha == 1.0:
        raise ParameterError("schemes 2 and 3 are degenerate at alpha = 1")


def _check_coefficients(p_bar, q_bar):
    if p_bar < 0 or q_bar < 0:
        raise ParameterError("diffusion weights must be nonnegative")
    if p_bar > 0 and q_bar > 0 and abs(p_bar + q_bar - 1.0) > 1e-12:
        raise ParameterError(f"two-sided weights must sum to 1, got {p_bar} + {q_bar}")


def _frozen(a):
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


def collocation_nodes(N):
    """The ``N`` Gauss-Legendre nodes, increasing and strictly interior."""
    if N < 1:
        raise ParameterError("N must be positive")
    return np.array(gauss_rule(N).nodes)


def trial_table(side, beta, N, x, base=None):
    """``phi_n(x)`` for ``n < N`` on the given side; shape ``(N, len(x))``."""
    return integrated_legendre_table(side, beta, N - 1, x, base)


def assemble_A(scheme, alpha, N, nodes=None):
    """Collocation matrices ``A^L_ij = phi^L_{j}(x_i)`` and ``A^R_ij = phi^R_{j}(x_i)``."""
    scheme = SchemeId.parse(scheme)
    _check_alpha(scheme, alpha)
    nodes = collocation_nodes(N) if nodes is None else np.asarray(nodes, dtype=float)
    beta = scheme.trial_order(alpha)
    return trial_table(LEFT, beta, N, nodes).T, trial_table(RIGHT, beta, N, nodes).T


# --------------------------------------------------------------------------
# Scheme 1/2 blocks

def _variant_order(variant, alpha):
    key = str(variant).lower().replace(" ", "")
    if key in ("scheme1", "1", "galerkin1"):
        return 0.5 * alpha
    if key in ("scheme2", "2", "petrovgalerkin2"):
        return 0.5 * (alpha + 1.0)
    raise ParameterError(f"unknown variant {variant!r}")


def vk_matrix(rho, N, M=None):
    """Coefficients ``V[k, m]`` of ``(1+x) xI^rho L_k`` in the basis ``I^rho L_m``.

    ``k < N``, ``m < M``. The inner product is a polynomial of degree
    ``k + m + 1`` and is integrated exactly by Gauss-Legendre.
    """
    M = N if M is None else M
    rule = gauss_rule(math.ceil((N + M) / 2) + 2)
    x = rule.nodes
    jk = jacobi_table(rho, -rho, N - 1, x) * (1.0 + x)
    jm = jacobi_table(-rho, rho, M - 1, x)
    inner = (jk * rule.weights) @ jm.T
    k = np.arange(N, dtype=float)
    m = np.arange(M, dtype=float)
    ck = gamma_ratio(k + 1.0, k + 1.0 + rho)
    cm = (m + 0.5) * gamma_ratio(m + 1.0, m + 1.0 - rho)
    return ck[:, None] * cm[None, :] * inner


def vk_coefficient(variant, k, m, alpha):
    """Single entry ``(v_k)_m`` of :func:`vk_matrix` for scheme ``variant``."""
    rho = _variant_order(variant, alpha)
    if k < 0 or m < 0:
        raise ParameterError("indices must be nonnegative")
    return float(vk_matrix(rho, k + 1, m + 1)[k, m])


def weighted_left_block(rho, N):
    """``(L_n, D^{rho*} v_k)`` with ``v_k = (1+x) xI^rho L_k``; tridiagonal.

    Uses ``D^{rho*} v_k = (1+x) L_k + rho/(2k+1) (L_{k+1} - L_{k-1})`` with
    ``L_{-1} := 1``.
    """
    g = legendre_norm(np.arange(N + 1))
    out = np.zeros((N, N))
    for k in range(N):
        out[k, k] = g[k]
        if k + 1 < N:
            out[k, k + 1] = (k + 1.0 + rho) / (2 * k + 1) * g[k + 1]
        if k >= 1:
            out[k, k - 1] = (k - rho) / (2 * k + 1) * g[k - 1]
        else:
            out[0, 0] -= rho * g[0]
    return out


def drift_block(beta, rho, N):
    """``(D phi_n, v_k) = -(phi_n, D v_k)`` via the operator algebra.

    ``phi_n = I^beta L_n`` and ``v_k = (1+x) w_k`` with ``w_k = xI^rho L_k``;
    ``D w_k = -xI^{rho-1} L_k`` (signed order). The integrand is a polynomial
    against ``(1-x)^{rho-1} (1+x)^beta``.
    """
    rule = gauss_jacobi_rule(rho - 1.0, beta, N + 2)
    x = rule.nodes
    n = np.arange(N, dtype=float)
    phi = gamma_ratio(n + 1.0, n + 1.0 + beta)[:, None] * jacobi_table(-beta, beta, N - 1, x)
    # w_k / (1-x)^(rho-1) and D w_k / (1-x)^(rho-1)
    w = gamma_ratio(n + 1.0, n + 1.0 + rho)[:, None] * jacobi_table(rho, -rho, N - 1, x) * (1.0 - x)
    dw = -gamma_ratio(n + 1.0, n + rho)[:, None] * jacobi_table(rho - 1.0, 1.0 - rho, N - 1, x)
    dv = w + (1.0 + x) * dw
    return -(dv * rule.weights) @ phi.T


def drift_block_closed_form(beta, N, split=1.0):
    """The closed-form drift block written in terms of the trial order ``beta``.

    ``c_n c_k ((1-x^2)^beta J_n^{-beta,beta}, (1+x) J_k^{beta,-beta}
    - (1-x)/(split (k+beta+1)) J_k^{1+beta,-1-beta})`` with
    ``c_j = Gamma(j+1)/Gamma(j+beta+1)``. With ``split = 1`` it equals
    :func:`drift_block` at ``rho = beta + 1``.
    """
    rule = gauss_jacobi_rule(beta, beta, N + 2)
    x = rule.nodes
    n = np.arange(N, dtype=float)
    c = gamma_ratio(n + 1.0, n + beta + 1.0)
    jn = jacobi_table(-beta, beta, N - 1, x)
    jk = ((1.0 + x) * jacobi_table(beta, -beta, N - 1, x)
          - (1.0 - x) / (split * (n[:, None] + beta + 1.0)) * jacobi_table(1.0 + beta, -1.0 - beta, N - 1, x))
    return c[:, None] * c[None, :] * ((jk * rule.weights) @ jn.T)


# --------------------------------------------------------------------------
# Scheme 3 blocks

def mixed_left_block(beta, N):
    """``L^(beta)_{k,n} = (L_n + L_{n+1}, xI^beta L_k)``."""
    rule = gauss_jacobi_rule(beta, 0.0, N + 2)
    x = rule.nodes
    leg = legendre_table(N, x)
    trial = leg[:-1] + leg[1:]
    k = np.arange(N, dtype=float)
    test = gamma_ratio(k + 1.0, k + 1.0 + beta)[:, None] * jacobi_table(beta, -beta, N - 1, x)
    return (test * rule.weights) @ trial.T


def mixed_right_block(beta, N):
    """``R^(beta)_{k,n} = (L_n - L_{n+1}, I^beta L_k)``."""
    rule = gauss_jacobi_rule(0.0, beta, N + 2)
    x = rule.nodes
    leg = legendre_table(N, x)
    trial = leg[:-1] - leg[1:]
    k = np.arange(N, dtype=float)
    test = gamma_ratio(k + 1.0, k + 1.0 + beta)[:, None] * jacobi_table(-beta, beta, N - 1, x)
    return (test * rule.weights) @ trial.T


def coupling_blocks(N):
    """``C^L`` and ``C^R`` for test rows ``k = 1..N``."""
    # row k-1 pairs with columns n = k - 1 and n = k
    cl = 2.0 * (np.eye(N) + np.eye(N, k=1))
    cr = 2.0 * (np.eye(N, k=1) - np.eye(N))
    return cl, cr


def mixed_drift_block(beta, N):
    """``(phi_n, (2k+1) L_k)`` for ``k = 1..N``."""
    rule = gauss_jacobi_rule(0.0, beta, N + 2)
    x = rule.nodes
    n = np.arange(N, dtype=float)
    phi = gamma_ratio(n + 1.0, n + 1.0 + beta)[:, None] * jacobi_table(-beta, beta, N - 1, x)
    k = np.arange(1, N + 1, dtype=float)
    test = (2.0 * k + 1.0)[:, None] * legendre_table(N, x)[1:]
    return (test * rule.weights) @ phi.T


# --------------------------------------------------------------------------
# load vectors

def project_source(source, test_lo_exp, test_hi_exp, poly, m):
    """``int h(x) (1+x)^a (1-x)^b P_k(x) dx`` for every row of ``poly(x)``.

    Each piece of ``source`` gets its own Gauss-Jacobi rule whose weight
    absorbs the piece's endpoint exponents plus the test weight exponents
    on the endpoints it shares with [-1, 1].
    """
    total = None
    for piece in source.pieces:
        lo_exp = piece.lo_exp + (test_lo_exp if piece.lo == -1.0 else 0.0)
        hi_exp = piece.hi_exp + (test_hi_exp if piece.hi == 1.0 else 0.0)
        x, w = gauss_jacobi_rule(hi_exp, lo_exp, m).mapped(piece.lo, piece.hi)
        vals = np.asarray(piece.smooth(x), dtype=float) * np.ones_like(x)
        if piece.lo != -1.0:
            vals = vals * (1.0 + x) ** test_lo_exp
        if piece.hi != 1.0:
            vals = vals * (1.0 - x) ** test_hi_exp
        contrib = poly(x) @ (vals * w)
        total = contrib if total is None else total + contrib
    return total


def _weighted_load(source, rho, N, slack=LOAD_SLACK):
    k = np.arange(N, dtype=float)
    ck = gamma_ratio(k + 1.0, k + 1.0 + rho)
    if not source.pieces:
        return np.zeros(N)
    vals = project_source(source, 1.0, rho, lambda x: jacobi_table(rho, -rho, N - 1, x), N + slack)
    return ck * vals


def _mixed_load(source, N, slack=LOAD_SLACK):
    if not source.pieces:
        return np.zeros(N)

    def poly(x):
        leg = legendre_table(N + 1, x)
        return leg[:-2] - leg[2:]
    return project_source(source, 0.0, 0.0, poly, N + slack)


# --------------------------------------------------------------------------
# full systems

def _coerce_source(h):
    if isinstance(h, Source):
        return h
    if np.isscalar(h):
        return Source.constant(float(h))
    if callable(h):
        return Source.from_callable(h)
    raise ParameterError("h must be a Source, a constant or a callable")


def _checked_solve(a, b, what):
    s = sla.svdvals(a)
    if not np.all(np.isfinite(s)) or s[-1] <= SINGULAR_RCOND * s[0]:
        raise AssemblyError(f"{what} is numerically singular (smallest singular value {s[-1]:.3e})")
    return sla.solve(a, b)


def _right_transfer(AL, AR):
    """``(A^R)^{-1} A^L`` as a linear solve with N right-hand sides."""
    return _checked_solve(AR, AL, "A^R")


def assemble(scheme, alpha, p_bar, q_bar, d_bar, h, N, slack=LOAD_SLACK):
    """Assemble the stiffness matrix and load vector of ``scheme``.

    ``slack`` is the number of load quadrature points beyond ``N``.
    """
    scheme = SchemeId.parse(scheme)
    if scheme is SchemeId.GALERKIN1:
        return assemble_scheme1(alpha, p_bar, q_bar, d_bar, h, N, slack)
    if scheme is SchemeId.PETROV_GALERKIN2:
        return assemble_scheme2(alpha, p_bar, q_bar, d_bar, h, N, slack)
    return assemble_scheme3(alpha, p_bar, q_bar, d_bar, h, N, slack)


def _assemble_weighted(scheme, alpha, p_bar, q_bar, d_bar, h, N, slack=LOAD_SLACK):
    _check_alpha(scheme, alpha)
    _check_coefficients(p_bar, q_bar)
    if N < 1:
        raise ParameterError("N must be positive")
    beta = scheme.trial_order(alpha)
    rho = scheme.test_order(alpha)
    nodes = collocation_nodes(N)
    source = _coerce_source(h)
    ml = weighted_left_block(rho, N)
    blocks = {"M_L": ml}
    stiffness = -p_bar * ml
    if q_bar != 0.0:
        AL, AR = assemble_A(scheme, alpha, N, nodes)
        mr = vk_matrix(rho, N) * legendre_norm(np.arange(N))[None, :]
        blocks.update(A_L=AL, A_R=AR, M_R=mr)
        stiffness = stiffness - q_bar * (mr @ _right_transfer(AL, AR))
    if d_bar != 0.0:
        if scheme is SchemeId.PETROV_GALERKIN2 and alpha > 1.0:
            mc = drift_block_closed_form(beta, N)
        else:
            mc = drift_block(beta, rho, N)
        blocks["M_C"] = mc
        stiffness = stiffness + d_bar * mc
    load = _weighted_load(source, rho, N, slack)
    blocks["f"] = load
    return _finish(scheme, alpha, N, stiffness, load, beta, nodes, (p_bar, q_bar, d_bar), blocks)


def _finish(scheme, alpha, N, stiffness, load, beta, nodes, coeffs, blocks):
    if not np.all(np.isfinite(stiffness)):
        raise AssemblyError("stiffness matrix has non-finite entries")
    if not np.all(np.isfinite(load)):
        raise AssemblyError("load vector has non-finite entries")
    return AssembledSystem(scheme, float(alpha), int(N), _frozen(stiffness), _frozen(load),
                           FracOrder(beta), _frozen(nodes), tuple(float(c) for c in coeffs),
                           {k: _frozen(v) for k, v in blocks.items()})


def assemble_scheme1(alpha, p_bar, q_bar, d_bar, h, N, slack=LOAD_SLACK):
    """Galerkin scheme: ``-p M^L - q M^R (A^R)^{-1} A^L + d M^C``."""
    return _assemble_weighted(SchemeId.GALERKIN1, alpha, p_bar, q_bar, d_bar, h, N, slack)


def assemble_scheme2(alpha, p_bar, q_bar, d_bar, h, N, slack=LOAD_SLACK):
    """Petrov-Galerkin scheme; same structure as Scheme 1 with test order ``(alpha+1)/2``."""
    return _assemble_weighted(SchemeId.PETROV_GALERKIN2, alpha, p_bar, q_bar, d_bar, h, N, slack)


def assemble_scheme3(alpha, p_bar, q_bar, d_bar, h, N, slack=LOAD_SLACK):
    """Mixed scheme: ``-p M^L - q M^R (A^R)^{-1} A^L + d M_3^C``.

    ``M^L = C^L (L^b)^{-1} B`` and ``M^R = -C^R (R^b)^{-1} B``.
    """
    scheme = SchemeId.MIXED3
    _check_alpha(scheme, alpha)
    _check_coefficients(p_bar, q_bar)
    if N < 1:
        raise ParameterError("N must be positive")
    beta = scheme.trial_order(alpha)
    nodes = collocation_nodes(N)
    source = _coerce_source(h)
    B = np.diag(legendre_norm(np.arange(N)))
    cl, cr = coupling_blocks(N)
    blocks = {"B": B, "C_L": cl, "C_R": cr}
    stiffness = np.zeros((N, N))
    if p_bar != 0.0:
        lb = mixed_left_block(beta, N)
        blocks["L_beta"] = lb
        m3l = cl @ _checked_solve(lb, B, "L^(beta)")
        blocks["M_L"] = m3l
        stiffness = stiffness - p_bar * m3l
    if q_bar != 0.0:
        rb = mixed_right_block(beta, N)
        AL, AR = assemble_A(scheme, alpha, N, nodes)
        blocks.update(R_beta=rb, A_L=AL, A_R=AR)
        # r carries D^{(a-1)*} u and D^{a*} = -D D^{(a-1)*}, so the right flux
        # enters the conservation row with the opposite sign to the left one
        m3r = -cr @ _checked_solve(rb, B, "R^(beta)")
        blocks["M_R"] = m3r
        stiffness = stiffness - q_bar * (m3r @ _right_transfer(AL, AR))
    if d_bar != 0.0:
        mc = mixed_drift_block(beta, N)
        blocks["M_C"] = mc
        stiffness = stiffness + d_bar * mc
    load = _mixed_load(source, N, slack)
    blocks["f"] = load
    return _finish(scheme, alpha, N, stiffness, load, beta, nodes, (p_bar, q_bar, d_bar), blocks)
