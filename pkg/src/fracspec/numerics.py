"""Dense solves, conditioning, solution evaluation, error norms and rate fits."""

from dataclasses import dataclass
import logging
import math
import warnings

import numpy as np
import scipy.linalg as sla

from .assembly import LOAD_SLACK, SchemeId, assemble, trial_table
from .errors import ParameterError, SolverError
from .fraccalc import LEFT, FracOrder
from .orthopoly import gauss_jacobi_rule, gauss_rule

log = logging.getLogger(__name__)

# geometric grading toward singular endpoints of the error integrand
GRADING_RATIO = 0.15
GRADING_DEPTH = 1e-16


def solve_dense(A, b):
    """LU solve with partial pivoting; raises on an exactly singular matrix."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ParameterError(f"matrix must be square, got shape {A.shape}")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise ParameterError("matrix and right-hand side must be finite")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", sla.LinAlgWarning)
            lu, piv = sla.lu_factor(A, check_finite=False)
    except (ValueError, sla.LinAlgError) as exc:
        raise SolverError(str(exc)) from exc
    if np.any(np.diag(lu) == 0.0):
        raise SolverError("matrix is exactly singular")
    return sla.lu_solve((lu, piv), b, check_finite=False)


def condition_number(A):
    """2-norm condition number ``s_max / s_min``; ``inf`` when ``s_min == 0``."""
    s = sla.svdvals(np.asarray(A, dtype=float))
    if s.size == 0:
        raise ParameterError("empty matrix")
    if s[-1] == 0.0:
        return math.inf
    return float(s[0] / s[-1])


@dataclass(frozen=True)
class NumericalSolution:
    scheme: SchemeId
    alpha: float
    N: int
    coeffs: np.ndarray
    trial_order: FracOrder

    def __call__(self, x):
        return eval_solution(self, x)


def solve_system(system):
    """Solve an :class:`~fracspec.assembly.AssembledSystem`."""
    coeffs = solve_dense(system.stiffness, system.load)
    coeffs.setflags(write=False)
    return NumericalSolution(system.scheme, system.alpha, system.N, coeffs, system.trial_order)


def solve_problem(problem, scheme, N, slack=LOAD_SLACK):
    """Assemble and solve ``problem`` with ``scheme``; returns ``(system, solution)``."""
    system = assemble(scheme, problem.alpha, problem.p_bar, problem.q_bar, problem.d_bar,
                      problem.rhs, N, slack)
    return system, solve_system(system)


def problem_error(problem, sol, points=None):
    """L2 error of ``sol`` against the problem's exact solution."""
    if problem.exact is None:
        raise ParameterError(f"problem {problem.label!r} has no exact solution")
    return l2_error(sol, problem.exact, problem.singular_exponents,
                    tuple(problem.kinks) + tuple(problem.rhs.kinks), points)


def eval_solution(sol, x, opx=None):
    """``sum_n c_n phi^L_n(x)``; ``opx`` optionally gives ``1 + x`` exactly."""
    xa = np.asarray(x, dtype=float)
    base = None if opx is None else np.asarray(opx, dtype=float).ravel()
    table = trial_table(LEFT, float(sol.trial_order), sol.N, xa.ravel(), base)
    out = (np.asarray(sol.coeffs) @ table).reshape(xa.shape)
    return float(out) if xa.ndim == 0 else out


def _graded_cells(a, b, da):
    """Cells of ``[a, b]`` graded geometrically toward both ends.

    ``da = a + 1`` is passed separately so that distances to -1 stay exact.
    Yields ``(lo, hi, lo + 1, touches_lo, touches_hi)``.
    """
    width = b - a
    offsets = [0.5]
    while offsets[-1] * GRADING_RATIO > GRADING_DEPTH:
        offsets.append(offsets[-1] * GRADING_RATIO)
    cells = [(a, a + offsets[-1] * width, da, True, False)]
    for inner, outer in zip(offsets[:0:-1], offsets[-2::-1]):
        cells.append((a + inner * width, a + outer * width, da + inner * width, False, False))
    for outer, inner in zip(offsets, offsets[1:]):
        lo = b - outer * width
        cells.append((lo, b - inner * width, da + (1.0 - outer) * width, False, False))
    lo = b - offsets[-1] * width
    cells.append((lo, b, da + (1.0 - offsets[-1]) * width, False, True))
    return cells


def l2_error(sol, exact, singular_exponents=(0.0, 0.0), kinks=(), points=None):
    """``||u_N - u||_{L2(-1,1)}``.

    The interval is split at ``kinks`` and each piece is graded geometrically
    toward its ends, where ``(u_N - u)^2`` may be non-smooth. The innermost
    cells at -1 and 1 use a Gauss-Jacobi rule whose weight absorbs twice the
    declared endpoint exponent when it is negative (the trial order counts
    at -1). Each cell gets ``4N + 64`` points unless ``points`` is given.
    """
    m = int(points) if points is not None else 4 * sol.N + 64
    lo_exp, hi_exp = (float(e) for e in singular_exponents)
    # only singular (negative) behaviour goes into the weight; the trial
    # basis itself carries (1+x)^beta
    lo_exp = min(lo_exp, float(sol.trial_order), 0.0)
    hi_exp = min(hi_exp, 0.0)
    breaks = [-1.0] + sorted(float(k) for k in kinks if -1.0 < k < 1.0) + [1.0]
    cells = []
    for a, b in zip(breaks[:-1], breaks[1:]):
        cells.extend(_graded_cells(a, b, a + 1.0))
    total = 0.0
    for a, b, da, at_lo, at_hi in cells:
        e_lo = 2.0 * lo_exp if (at_lo and a == -1.0) else 0.0
        e_hi = 2.0 * hi_exp if (at_hi and b == 1.0) else 0.0
        rule = gauss_jacobi_rule(e_hi, e_lo, m)
        half = 0.5 * (b - a)
        t = half * (rule.nodes + 1.0)
        x = a + t
        w = rule.weights * half ** (1.0 + e_lo + e_hi)
        diff = eval_solution(sol, x, da + t) - np.asarray(exact(x), dtype=float)
        vals = diff * diff
        if e_lo:
            vals = vals / t ** e_lo
        if e_hi:
            vals = vals / (half * (1.0 - rule.nodes)) ** e_hi
        total += float(vals @ w)
    return math.sqrt(max(total, 0.0))


def fit_rate(Ns, errs):
    """Least-squares decay order ``-d log(err) / d log(N)``.

    Nonpositive errors are dropped (logged). The smallest ``N`` is dropped
    when its residual exceeds three times the fit's RMS residual.
    """
    Ns = np.asarray(Ns, dtype=float)
    errs = np.asarray(errs, dtype=float)
    keep = np.isfinite(errs) & (errs > 0)
    if np.any(~keep):
        log.warning("fit_rate: dropped %d nonpositive errors", int(np.sum(~keep)))
    Ns, errs = Ns[keep], errs[keep]
    if Ns.size < 3:
        raise ParameterError("need at least 3 positive samples to fit a rate")
    order = np.argsort(Ns)
    Ns, errs = Ns[order], errs[order]

    def fit(n, e):
        X = np.column_stack([np.log(n), np.ones_like(n)])
        coef, *_ = np.linalg.lstsq(X, np.log(e), rcond=None)
        return coef, np.log(e) - X @ coef

    coef, resid = fit(Ns, errs)
    rms = math.sqrt(float(np.mean(resid ** 2)))
    if Ns.size > 3 and rms > 0 and abs(resid[0]) > 3.0 * rms:
        coef, _ = fit(Ns[1:], errs[1:])
    return float(-coef[0])


def fit_growth(Ns, values):
    """Least-squares growth exponent ``d log(value) / d log(N)``."""
    return -fit_rate(Ns, values)
