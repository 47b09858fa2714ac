import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import assume, given, strategies as st
from scipy.special import gamma

import _oracle as O
from fracspec.errors import ParameterError, ShapeError, SingularityError, StructuralError
from fracspec.fraccalc import (GJF, LEFT, RIGHT, FracOrder, PowerSum, apply_signed,
                               apply_signed_power, classical_derivative_power, eval_gjf,
                               eval_powersum, frac_derive_gjf, frac_integrate_gjf,
                               frac_integrate_power, gamma_ratio, gjf_to_powersum,
                               integrated_legendre_table, legendre_gjf, manufactured_rhs,
                               mixed_power_to_side, rl_derivative_power)
from fracspec.orthopoly import gauss_jacobi_rule, legendre_table

orders = st.floats(0.05, 0.95)


def fields(g):
    return np.array([g.coeff, g.mu, g.sigma, g.eta, g.n], dtype=float)


# --- GJF closed forms -------------------------------------------------------

def test_integrate_constant_half():
    g = frac_integrate_gjf(GJF(LEFT, 1.0, 0.0, 0.3, 0.0, 0), 0.5)
    assert g.coeff == pytest.approx(1.1283791671, abs=1e-10)
    assert g.mu == 0.5 and g.compatible


@given(orders, orders, st.integers(0, 20), st.sampled_from([LEFT, RIGHT]))
def test_integral_semigroup(a, b, n, side):
    g = legendre_gjf(n, side)
    two = frac_integrate_gjf(frac_integrate_gjf(g, a), b)
    one = frac_integrate_gjf(g, a + b)
    assert np.allclose(fields(two), fields(one), rtol=1e-13, atol=1e-13)


@given(orders, st.integers(0, 20), st.sampled_from([LEFT, RIGHT]))
def test_integrate_then_derive_is_identity(rho, n, side):
    g = legendre_gjf(n, side, coeff=1.7)
    back = frac_derive_gjf(frac_integrate_gjf(g, rho), rho)
    assert np.allclose(fields(back), fields(g), rtol=1e-13, atol=1e-14)


def test_derive_trial_function_gives_polynomial():
    alpha = 1.4
    for n in range(6):
        g = GJF(LEFT, 1.0, alpha / 2, -alpha / 2, alpha / 2, n)
        d = frac_derive_gjf(g, alpha / 2)
        assert d.mu == pytest.approx(0.0, abs=1e-15)
        assert d.sigma == pytest.approx(0.0, abs=1e-15) and d.eta == pytest.approx(0.0, abs=1e-15)
        assert d.coeff == pytest.approx(gamma(n + alpha / 2 + 1) / gamma(n + 1), rel=1e-13)


def test_derive_sqrt_to_constant():
    d = frac_derive_gjf(GJF(LEFT, 1.0, 0.5, -0.5, 0.5, 0), 0.5)
    assert d.coeff == pytest.approx(math.gamma(1.5), rel=1e-14) and d.mu == pytest.approx(0.0)


def test_derive_then_integrate_is_identity():
    g = GJF(RIGHT, 0.6, 0.8, 0.8, -0.8, 4)
    back = frac_integrate_gjf(frac_derive_gjf(g, 0.3), 0.3)
    assert np.allclose(fields(back), fields(g), atol=1e-14)


def test_gjf_errors():
    with pytest.raises(StructuralError):
        frac_integrate_gjf(GJF(LEFT, 1.0, 0.5, 0.0, 0.0, 1), 0.3)
    with pytest.raises(ParameterError):
        frac_integrate_gjf(legendre_gjf(2), 0.0)
    with pytest.raises(SingularityError):
        frac_derive_gjf(GJF(LEFT, 1.0, 0.2, -0.2, 0.2, 1), 1.5)
    with pytest.raises(StructuralError):
        frac_derive_gjf(GJF(RIGHT, 1.0, 0.5, 0.0, 0.5, 1), 0.2)


def test_compatible_flag():
    assert GJF(LEFT, 1, 0.3, -0.3, 0.3, 2).compatible
    assert not GJF(LEFT, 1, 0.3, 0.3, -0.3, 2).compatible
    assert GJF(RIGHT, 1, 0.3, 0.3, -0.3, 2).compatible


def test_apply_signed_examples():
    g = legendre_gjf(3)
    assert apply_signed(g, 0) == g
    there = apply_signed(apply_signed(g, 0.3), -0.3)
    assert np.allclose(fields(there), fields(g), atol=1e-14)
    d = apply_signed(GJF(LEFT, 1.0, 0.25, -0.25, 0.25, 2), FracOrder(-0.25))
    assert d.coeff == pytest.approx(gamma(3.25) / gamma(3), rel=1e-14)
    assert (d.mu, d.sigma, d.eta) == pytest.approx((0.0, 0.0, 0.0), abs=1e-15)


@given(st.floats(-0.45, 0.9), st.floats(-0.45, 0.9), st.integers(0, 10), st.sampled_from([LEFT, RIGHT]))
def test_apply_signed_group_action(a, b, n, side):
    assume(abs(a) > 1e-3 and abs(b) > 1e-3 and abs(a + b) > 1e-3)
    g = legendre_gjf(n, side)
    two = apply_signed(apply_signed(g, a), b)
    one = apply_signed(g, a + b)
    assert np.allclose(fields(two), fields(one), rtol=1e-12, atol=1e-13)


def test_fracorder_cap():
    with pytest.raises(ParameterError):
        FracOrder(4.0)
    assert FracOrder(-0.3).kind == "derivative" and FracOrder(0).kind == "identity"
    assert float(FracOrder(0.2) + 0.3) == pytest.approx(0.5)


def test_gamma_ratio_large_n():
    n = np.arange(2001, dtype=float)
    r = gamma_ratio(n + 1.0, n + 1.0 + 3.9)
    assert np.all(np.isfinite(r)) and r[-1] > 0
    assert r[2000] == pytest.approx(float(mp.gammaprod([2001], [2004.9])), rel=1e-12)


# --- evaluation --------------------------------------------------------------

def test_eval_trivial():
    assert eval_gjf(GJF(LEFT, 1.0, 0.0, 0.0, 0.0, 0), 0.3) == 1.0
    assert eval_powersum(PowerSum(LEFT, ((1.0, 0.5),)), 0.0) == 1.0


def test_gjf_powersum_cross_check():
    alpha = 1.5
    g = frac_integrate_gjf(legendre_gjf(0), alpha / 2)
    p = PowerSum(LEFT, ((1.0 / gamma(1 + alpha / 2), alpha / 2),))
    assert abs(eval_gjf(g, 0.3) - eval_powersum(p, 0.3)) <= 1e-13


@given(st.floats(-0.9, 0.9), st.integers(0, 12), st.sampled_from([LEFT, RIGHT]), st.floats(-0.99, 0.99))
def test_gjf_to_powersum(order, n, side, x):
    assume(abs(order) > 1e-3)
    g = apply_signed(legendre_gjf(n, side), order)
    assert eval_powersum(gjf_to_powersum(g), x) == pytest.approx(eval_gjf(g, x), rel=1e-9, abs=1e-9)


def test_endpoint_singularity():
    g = apply_signed(legendre_gjf(1), -0.3)
    with pytest.raises(SingularityError):
        eval_gjf(g, -1.0)
    with pytest.raises(SingularityError):
        eval_powersum(PowerSum(RIGHT, ((1.0, -0.5),)), 1.0)


def test_integrated_table_matches_gjf():
    x = np.linspace(-0.9, 0.9, 7)
    for side in (LEFT, RIGHT):
        t = integrated_legendre_table(side, 0.65, 6, x)
        for n in range(7):
            assert np.allclose(t[n], eval_gjf(apply_signed(legendre_gjf(n, side), 0.65), x), atol=1e-14)


# --- power sums --------------------------------------------------------------

def test_powersum_canonical():
    p = PowerSum(LEFT, ((1.0, 2.0), (2.0, 2.0 + 1e-13), (0.0, 5.0), (1.0, 0.5)))
    assert p.exponents == (0.5, 2.0) and p.coeffs[1] == 3.0
    with pytest.raises(SingularityError):
        PowerSum(LEFT, ((1.0, -1.0),))


def test_integrate_power_examples():
    p = frac_integrate_power(PowerSum(LEFT, ((1.0, 0.0),)), 0.5)
    assert p.terms[0][0] == pytest.approx(2 / math.sqrt(math.pi), rel=1e-14)
    assert p.terms[0][1] == 0.5
    q = frac_integrate_power(PowerSum(LEFT, ((1.0, 3.0),)), 2.0)
    assert np.allclose(q.terms, [(1 / 20, 5.0)], rtol=1e-14)
    twice = frac_integrate_power(frac_integrate_power(PowerSum(RIGHT, ((1.0, 1.5),)), 1.0), 1.0)
    once = frac_integrate_power(PowerSum(RIGHT, ((1.0, 1.5),)), 2.0)
    assert np.allclose(twice.terms, once.terms, rtol=1e-14)
    with pytest.raises(ParameterError):
        frac_integrate_power(q, -0.5)


def test_rl_derivative_example1_pair():
    for alpha in (1.3, 1.6):
        s = 3 + alpha / 2
        out = rl_derivative_power(PowerSum(LEFT, ((1.0, s),)), alpha)
        assert out.exponents == pytest.approx((3 - alpha / 2,))
        assert out.coeffs[0] == pytest.approx(gamma(4 + alpha / 2) / gamma(4 - alpha / 2), rel=1e-13)


def test_rl_derivative_continuity_at_one():
    # each one-sided probe is O(1e-4) away from the limit; their mean is O(1e-8)
    x = np.linspace(-0.9, 0.9, 10)
    p = PowerSum(LEFT, ((1.0, 2.0),))
    lo, hi = (eval_powersum(rl_derivative_power(p, a), x) for a in (1 - 1e-4, 1 + 1e-4))
    assert np.max(np.abs(0.5 * (lo + hi) - 2 * (1 + x))) <= 1e-6
    for v in (lo, hi):
        assert np.max(np.abs(v - 2 * (1 + x))) <= 1e-3
    assert rl_derivative_power(PowerSum(LEFT, ()), 1.5).is_zero()
    with pytest.raises(ParameterError):
        rl_derivative_power(p, 1.0)


def _oracle_fn(p):
    return O.one_sided(p.side, [(s, c) for c, s in p.terms])


@given(st.floats(0.05, 1.95), st.sampled_from([LEFT, RIGHT]),
       st.lists(st.tuples(st.floats(-2, 2), st.floats(1.0, 6.0)), min_size=1, max_size=4))
def test_rl_derivative_against_oracle(alpha, side, terms):
    assume(abs(alpha - 1) > 1e-3)
    p = PowerSum(side, tuple(terms))
    got = rl_derivative_power(p, alpha)
    want = O.derivative(_oracle_fn(p), side, alpha)
    x = np.linspace(-0.9, 0.9, 7)
    w = np.array([float(want(xi)) for xi in x])
    assert np.allclose(eval_powersum(got, x), w, rtol=1e-11, atol=1e-11)


def test_apply_signed_power_dispatch():
    p = PowerSum(LEFT, ((1.0, 2.5),))
    assert apply_signed_power(p, 0) == p
    back = apply_signed_power(apply_signed_power(p, 0.4), -0.4)
    assert np.allclose(back.terms, p.terms, rtol=1e-13)


def test_classical_derivative_power():
    d = classical_derivative_power(PowerSum(RIGHT, ((2.0, 3.0), (5.0, 0.0))))
    assert np.allclose(d.terms, [(-6.0, 2.0)])


def test_mixed_power_to_side():
    p = mixed_power_to_side(1.0, 1.5, 2, LEFT)
    assert np.allclose(p.terms, [(4.0, 1.5), (-4.0, 2.5), (1.0, 3.5)])
    assert mixed_power_to_side(2.0, 0.7, 0, LEFT).terms == ((2.0, 0.7),)
    with pytest.raises(ShapeError):
        mixed_power_to_side(1.0, 1.5, 2.5, LEFT)


def test_mixed_power_pointwise():
    x = np.random.default_rng(1).uniform(-0.99, 0.99, 20)
    p = mixed_power_to_side(1.0, 1.5, 2, LEFT)
    direct = (1 + x) ** 1.5 * (1 - x) ** 2
    assert np.max(np.abs(eval_powersum(p, x) / direct - 1.0)) <= 1e-12


@given(st.floats(0.0, 5.0), st.integers(0, 6), st.sampled_from([LEFT, RIGHT]))
def test_mixed_power_backward_stable(a, b, side):
    # the expansion is exact; evaluation error is bounded by the summed term sizes
    x = np.random.default_rng(1).uniform(-0.99, 0.99, 20)
    la, ra = (a, b) if side == LEFT else (b, a)
    p = mixed_power_to_side(1.0, la, ra, side)
    base = 1 + x if side == LEFT else 1 - x
    size = sum(abs(c) * base ** s for c, s in p.terms)
    direct = (1 + x) ** la * (1 - x) ** ra
    assert np.all(np.abs(eval_powersum(p, x) - direct) <= 64 * np.finfo(float).eps * size)


# --- manufactured sources ----------------------------------------------------

def test_manufactured_example1_left_branch():
    for alpha in (1.3, 1.6):
        h = manufactured_rhs(3 + alpha / 2, 0, alpha, 1.0, 0.0, 0.0)
        x = np.linspace(-0.95, 0.95, 20)
        # u = (1+x)^{3+a/2}; the left branch of h carries the opposite sign and Gamma(4+a/2)
        want = -(1 + x) ** (3 - alpha / 2) * gamma(4 + alpha / 2) / gamma(4 - alpha / 2)
        assert np.allclose(h(x), want, rtol=1e-11)


def test_manufactured_drift_only():
    h = manufactured_rhs(1, 1, 1.5, 0.0, 0.0, 1.0)
    x = np.linspace(-0.9, 0.9, 11)
    assert np.allclose(h(x), -2 * x, atol=1e-15)
    h2 = manufactured_rhs(2, 4, 0.7, 0.0, 0.0, 1.0)
    du = 2 * (1 + x) * (1 - x) ** 4 - 4 * (1 + x) ** 2 * (1 - x) ** 3
    assert np.allclose(h2(x), du, atol=1e-14)


def _quadrature_rl(f_deriv, alpha, x, side):
    """D^alpha u = D I^{2-alpha} D u by adaptive quadrature (alpha in (1,2))."""
    r = 2 - alpha

    def I(y):
        if side == LEFT:
            return mp.quad(lambda s: (y - s) ** (r - 1) * f_deriv(s), [-1, y]) / mp.gamma(r)
        return mp.quad(lambda s: (s - y) ** (r - 1) * f_deriv(s), [y, 1]) / mp.gamma(r)
    d = mp.diff(I, x)
    return d if side == LEFT else d  # (-1)^2 D xI^{2-a} D


def test_manufactured_against_quadrature_oracle():
    alpha = 1.4
    p, q, d = 0.3, 0.7, 0.5

    def du(s):
        return 4 * (1 + s) ** 3 * (1 - s) ** 4 - 4 * (1 + s) ** 4 * (1 - s) ** 3

    h = manufactured_rhs(4, 4, alpha, p, q, d)
    mp.mp.dps = 20
    try:
        for x in np.linspace(-0.8, 0.8, 10):
            left = _quadrature_rl(du, alpha, mp.mpf(x), LEFT)
            right = _quadrature_rl(du, alpha, mp.mpf(x), RIGHT)
            want = -(p * left + q * right) + d * du(mp.mpf(x))
            assert abs(h(x) - float(want)) <= 1e-8
    finally:
        mp.mp.dps = 30


def test_manufactured_crossed_operator():
    # non-integer exponent on the near side of the right operator (Example 3 shape)
    alpha, a, b = 1.3, 5 + 0.65, 5.0
    from fracspec.fraccalc import one_sided_operator
    src = one_sided_operator(a, b, alpha, RIGHT)
    mp.mp.dps = 25
    try:
        def dn(s):
            return mp.diff(lambda t: (1 + t) ** a * (1 - t) ** b, s, 2)
        for x in (-0.7, 0.0, 0.55):
            xm = mp.mpf(x)
            r = 2 - alpha
            want = mp.quad(lambda s: (s - xm) ** (r - 1) * dn(s), [xm, 1]) / mp.gamma(r)
            assert src(x) == pytest.approx(float(want), rel=1e-10, abs=1e-10)
    finally:
        mp.mp.dps = 30


def test_manufactured_shape_error():
    with pytest.raises(ShapeError):
        manufactured_rhs(-0.5, 1, 1.5, 0.5, 0.5, 0)


# --- operator identities (also run in the acceptance suite) ------------------

def integral_roundtrip(rho, seed):
    """max |D^rho I^rho u - u| over 30 nodes for a random degree-8 Legendre series."""
    c = np.random.default_rng(seed).normal(size=9)
    x = gauss_jacobi_rule(0.0, 0.0, 30).nodes
    u = c @ legendre_table(8, x)
    acc = np.zeros_like(x)
    for n in range(9):
        g = apply_signed(apply_signed(legendre_gjf(n), rho), -rho)
        acc += c[n] * eval_gjf(g, x)
    return float(np.max(np.abs(acc - u)))


def adjoint_defect(alpha, n, m):
    """``(D^a u, v) - (u, D^{a*} v)`` for ``u = I^a L_n``, ``v = xI^a L_m`` by Gauss-Jacobi."""
    u = apply_signed(legendre_gjf(n, LEFT), alpha)
    v = apply_signed(legendre_gjf(m, RIGHT), alpha)
    du = apply_signed(u, -alpha)   # polynomial L_n
    dv = apply_signed(v, -alpha)   # polynomial L_m
    # (L_n, xI^a L_m): weight (1-x)^a; (I^a L_n, L_m): weight (1+x)^a
    r1 = gauss_jacobi_rule(alpha, 0.0, n + m + 4)
    lhs = r1.integrate(eval_gjf(du, r1.nodes) * eval_gjf(v, r1.nodes) / (1 - r1.nodes) ** alpha)
    r2 = gauss_jacobi_rule(0.0, alpha, n + m + 4)
    rhs = r2.integrate(eval_gjf(u, r2.nodes) / (1 + r2.nodes) ** alpha * eval_gjf(dv, r2.nodes))
    return abs(lhs - rhs), lhs


@pytest.mark.parametrize("rho", [0.25, 0.65, 0.9])
def test_derivative_inverts_integral(rho):
    for seed in range(5):
        assert integral_roundtrip(rho, seed) <= 1e-11


@pytest.mark.parametrize("alpha", [0.6, 1.3])
def test_adjoint_pairing(alpha):
    for n in range(7):
        for m in range(7):
            diff, val = adjoint_defect(alpha, n, m)
            assert diff <= 1e-10
            # independent value of the same pairing
            want = O.inner(O.legendre(n), O.integrate(O.legendre(m, O.RIGHT), O.RIGHT, alpha))
            assert val == pytest.approx(float(want), abs=1e-12)
