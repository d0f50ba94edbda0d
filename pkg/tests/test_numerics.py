"""Kernel tests: incomplete gamma, Bessel functions, quadrature rules, 2F1.

Expected values come from independent oracles: adaptive quadrature
(scipy.integrate), plain series summation coded inline, closed forms,
or a hand-built Golub-Welsch eigenproblem.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from astars_noma.numerics import (QuadratureRule, _bessel_i01e, bessel_k,
                                  gauss_chebyshev_nodes, gauss_laguerre_rule,
                                  hyp2f1_series, laguerre_half,
                                  lower_incomplete_gamma, reg_lower_gamma)


# ---------------------------------------------------------------------------
# incomplete gamma
# ---------------------------------------------------------------------------

def quad_lower_gamma(a, x):
    """Adaptive-quadrature oracle for int_0^x t^{a-1} e^{-t} dt."""
    if x == 0.0:
        return 0.0
    val, _ = integrate.quad(lambda t: t ** (a - 1.0) * math.exp(-t), 0.0, x,
                            epsabs=1e-15, epsrel=1e-13, limit=200)
    return val


def test_lower_gamma_trivial_cases():
    assert lower_incomplete_gamma(1.0, 0.0) == 0.0
    assert lower_incomplete_gamma(1.0, 1.0) == pytest.approx(1.0 - math.exp(-1.0), rel=1e-14)


def test_lower_gamma_vs_quadrature_oracle():
    # frozen from the quadrature oracle below; recomputed live as a guard
    assert lower_incomplete_gamma(2.5, 3.0) == pytest.approx(0.9222712123078349, rel=1e-12)
    assert lower_incomplete_gamma(2.5, 3.0) == pytest.approx(quad_lower_gamma(2.5, 3.0), rel=1e-12)


@pytest.mark.parametrize("a", [0.3, 0.7, 1.0, 2.5, 5.0])
@pytest.mark.parametrize("x", [0.1, 1.0, 2.9, 7.5])
def test_lower_gamma_grid_vs_oracle(a, x):
    # the acceptance grid: 20 (a, x) pairs at 1e-10 relative
    assert lower_incomplete_gamma(a, x) == pytest.approx(quad_lower_gamma(a, x), rel=1e-10)


def test_lower_gamma_domain_errors():
    with pytest.raises(ValueError):
        lower_incomplete_gamma(0.0, 1.0)
    with pytest.raises(ValueError):
        lower_incomplete_gamma(-2.0, 1.0)
    with pytest.raises(ValueError):
        lower_incomplete_gamma(1.0, -0.5)


def test_reg_lower_gamma_vectorized_matches_scalar():
    xs = np.linspace(0.0, 60.0, 301)
    vec = reg_lower_gamma(16.8, xs)
    scal = np.array([reg_lower_gamma(16.8, float(x)) for x in xs])
    assert np.max(np.abs(vec - scal)) < 1e-15


@given(a=st.floats(0.05, 60.0), x1=st.floats(0.0, 100.0), x2=st.floats(0.0, 100.0))
@settings(max_examples=200, deadline=None)
def test_reg_lower_gamma_monotone_and_bounded(a, x1, x2):
    lo, hi = sorted((x1, x2))
    p_lo = reg_lower_gamma(a, lo)
    p_hi = reg_lower_gamma(a, hi)
    assert 0.0 <= p_lo <= 1.0 and 0.0 <= p_hi <= 1.0
    assert p_hi >= p_lo - 1e-13


def test_lower_gamma_saturates_at_gamma():
    assert lower_incomplete_gamma(3.7, 500.0) == pytest.approx(math.gamma(3.7), rel=1e-14)


# ---------------------------------------------------------------------------
# Bessel functions
# ---------------------------------------------------------------------------

def test_bessel_k_half_integer_closed_forms():
    # K_{1/2}(x) = sqrt(pi/(2x)) e^{-x};  K_{3/2}(x) = same * (1 + 1/x)
    for x in (0.5, 1.0, 2.0, 5.0):
        base = math.sqrt(math.pi / (2.0 * x)) * math.exp(-x)
        for nu, ref in ((0.5, base), (-0.5, base),
                        (1.5, base * (1.0 + 1.0 / x)), (-1.5, base * (1.0 + 1.0 / x))):
            assert bessel_k(nu, x) == pytest.approx(ref, rel=1e-10)


def test_bessel_k_spot_value():
    assert bessel_k(0.5, 2.0) == pytest.approx(math.sqrt(math.pi / 4.0) * math.exp(-2.0),
                                               rel=1e-12)


def test_bessel_k_order_symmetry():
    for nu in (0.3, 1.2, 2.7):
        for x in (0.4, 1.0, 3.0, 9.0):
            assert bessel_k(-nu, x) == pytest.approx(bessel_k(nu, x), rel=1e-13)


def test_bessel_k0_vs_integral_oracle():
    # K_0(x) = int_0^inf exp(-x cosh t) dt
    for x in (0.6, 1.0, 2.5):
        ref, _ = integrate.quad(lambda t: math.exp(-x * math.cosh(t)), 0.0, 30.0,
                                epsabs=1e-15, epsrel=1e-13, limit=200)
        assert bessel_k(0.0, x) == pytest.approx(ref, rel=1e-11)


def test_bessel_k_integer_order_vs_integral_oracle():
    # K_n(x) = int_0^inf exp(-x cosh t) cosh(n t) dt
    for n in (1.0, 2.0, 3.0):
        for x in (1.0, 4.0):
            ref, _ = integrate.quad(
                lambda t: math.exp(-x * math.cosh(t)) * math.cosh(n * t),
                0.0, 30.0, epsabs=1e-15, epsrel=1e-13, limit=200)
            assert bessel_k(n, x) == pytest.approx(ref, rel=1e-10)


def test_bessel_k_domain_error():
    with pytest.raises(ValueError):
        bessel_k(0.5, 0.0)
    with pytest.raises(ValueError):
        bessel_k(0.5, -1.0)


def _i0_i1_series_oracle(x):
    """Plain power-series oracle for I0 and I1."""
    t = x * x / 4.0
    term, i0 = 1.0, 1.0
    for k in range(1, 200):
        term *= t / (k * k)
        i0 += term
        if term < 1e-18 * i0:
            break
    term, s1 = 1.0, 1.0
    for k in range(1, 200):
        term *= t / (k * (k + 1))
        s1 += term
        if term < 1e-18 * s1:
            break
    return i0, 0.5 * x * s1


def test_laguerre_half_at_zero():
    assert laguerre_half(0.0) == 1.0


def test_laguerre_half_at_minus_one_vs_series_oracle():
    i0, i1 = _i0_i1_series_oracle(0.5)
    ref = math.exp(-0.5) * (2.0 * i0 + i1)
    assert laguerre_half(-1.0) == pytest.approx(ref, rel=1e-14)
    assert laguerre_half(-1.0) == pytest.approx(1.446491344083172, rel=1e-13)


def test_laguerre_half_increasing_on_negative_axis():
    grid = [0.0, 0.5, 1.0, 2.0]
    vals = [laguerre_half(-k) for k in grid]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_scaled_bessel_i_branch_consistency():
    # series/asymptotic switchover at x = 20: both branches must match the
    # integral representation I_n(x) = (1/pi) int_0^pi e^{x cos t} cos(nt) dt
    for x in (19.999999, 20.000001):
        i0e, i1e = _bessel_i01e(x)
        for n, got in ((0, i0e), (1, i1e)):
            ref, _ = integrate.quad(
                lambda t: math.exp(x * (math.cos(t) - 1.0)) * math.cos(n * t),
                0.0, math.pi, epsabs=1e-16, epsrel=1e-13, limit=200)
            assert got == pytest.approx(ref / math.pi, rel=1e-12)


# ---------------------------------------------------------------------------
# quadrature rules
# ---------------------------------------------------------------------------

def test_gauss_laguerre_k1():
    rule = gauss_laguerre_rule(1)
    assert rule.nodes == pytest.approx([1.0], abs=1e-14)
    assert rule.weights == pytest.approx([1.0], abs=1e-14)


def test_gauss_laguerre_k2_vs_golub_welsch_oracle():
    # 2x2 Jacobi matrix [[1, 1], [1, 3]]: eigenvalues are the roots of
    # y^2 - 4y + 2, weights are the squared first eigenvector components
    jac = np.array([[1.0, 1.0], [1.0, 3.0]])
    vals, vecs = np.linalg.eigh(jac)
    rule = gauss_laguerre_rule(2)
    assert rule.nodes == pytest.approx(vals, abs=1e-13)
    assert rule.nodes == pytest.approx([2.0 - math.sqrt(2.0), 2.0 + math.sqrt(2.0)],
                                       abs=1e-13)
    assert rule.weights == pytest.approx(vecs[0, :] ** 2, abs=1e-13)


def test_gauss_laguerre_third_moment_k5():
    rule = gauss_laguerre_rule(5)
    assert float(np.sum(rule.weights * rule.nodes ** 3)) == pytest.approx(6.0, abs=1e-10)


@pytest.mark.parametrize("size", [1, 2, 5, 13, 40])
def test_gauss_laguerre_moment_exactness(size):
    rule = gauss_laguerre_rule(size)
    for m in range(2 * size):
        est = float(np.sum(rule.weights * rule.nodes ** m))
        assert est == pytest.approx(math.factorial(m), rel=1e-9), f"moment {m}"


@pytest.mark.parametrize("size", [1, 2, 5, 40, 200, 1000])
def test_gauss_laguerre_structure(size):
    rule = gauss_laguerre_rule(size)
    assert rule.kind == "laguerre"
    assert len(rule) == size
    assert np.all(np.diff(rule.nodes) > 0.0)
    assert np.all(rule.nodes > 0.0)
    assert np.all(rule.weights > 0.0)
    assert abs(rule.weights.sum() - 1.0) < 1e-10


def test_gauss_laguerre_large_k_noninteger_power():
    rule = gauss_laguerre_rule(200)
    p = 16.8
    est = float(np.sum(rule.weights * rule.nodes ** (p - 1.0)))
    assert est == pytest.approx(math.gamma(p), rel=1e-12)


def test_gauss_laguerre_range_errors():
    with pytest.raises(ValueError):
        gauss_laguerre_rule(0)
    with pytest.raises(ValueError):
        gauss_laguerre_rule(2001)


def test_chebyshev_small_rules():
    assert gauss_chebyshev_nodes(1).nodes == pytest.approx([0.0], abs=1e-15)
    rule = gauss_chebyshev_nodes(2)
    assert rule.nodes == pytest.approx([-math.sqrt(2) / 2, math.sqrt(2) / 2], abs=1e-15)
    assert rule.weights == pytest.approx([math.pi / 2] * 2, abs=1e-15)


def test_chebyshev_nodes_interior_and_sorted():
    rule = gauss_chebyshev_nodes(100)
    assert np.all((rule.nodes > -1.0) & (rule.nodes < 1.0))
    assert np.all(np.diff(rule.nodes) > 0.0)
    # weighted rule integrates 1/sqrt(1-x^2) measure: total mass pi
    assert rule.weights.sum() == pytest.approx(math.pi, rel=1e-14)


def test_chebyshev_range_errors():
    with pytest.raises(ValueError):
        gauss_chebyshev_nodes(0)
    with pytest.raises(ValueError):
        gauss_chebyshev_nodes(10_001)


def test_rules_are_cached_and_frozen():
    a = gauss_laguerre_rule(17)
    b = gauss_laguerre_rule(17)
    assert a is b
    with pytest.raises(ValueError):
        a.nodes[0] = 0.0


def test_rule_determinism_across_threads():
    from concurrent.futures import ThreadPoolExecutor
    gauss_laguerre_rule.cache_clear()
    with ThreadPoolExecutor(max_workers=8) as pool:
        rules = list(pool.map(lambda _: gauss_laguerre_rule(64).nodes.copy(), range(16)))
    ref = rules[0]
    for r in rules[1:]:
        assert np.array_equal(r, ref)


# ---------------------------------------------------------------------------
# hypergeometric series
# ---------------------------------------------------------------------------

def _hyp2f1_term_sum_oracle(a, b, c, z):
    """Plain term-by-term summation to 1e-12 term tolerance."""
    term, total = 1.0, 1.0
    n = 0
    while True:
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z
        total += term
        n += 1
        if abs(term) < 1e-12 * abs(total):
            return total


def test_hyp2f1_constant_term():
    assert hyp2f1_series(2.0, 0.5, 2.5, 0.0) == 1.0


def test_hyp2f1_vs_series_oracle():
    got = hyp2f1_series(2.0, 0.5, 2.5, 0.5)
    assert got == pytest.approx(_hyp2f1_term_sum_oracle(2.0, 0.5, 2.5, 0.5), rel=1e-11)
    assert got == pytest.approx(1.304513580631037, rel=1e-12)


def test_hyp2f1_log_closed_form():
    z = 0.3
    assert hyp2f1_series(1.0, 1.0, 2.0, z) == pytest.approx(-math.log1p(-z) / z, rel=1e-13)


def test_hyp2f1_balanced_branch_continuity():
    # direct series on one side of the 0.5 split, connection series on the other
    lo = hyp2f1_series(2.0, 0.5, 2.5, 0.4999999)
    hi = hyp2f1_series(2.0, 0.5, 2.5, 0.5000001)
    assert lo == pytest.approx(hi, rel=1e-6)


def test_hyp2f1_near_one_balanced_grows_like_log():
    # c - a - b = 0: the function diverges ~ -(3/4) ln(1-z)
    v1 = hyp2f1_series(2.0, 0.5, 2.5, 1.0 - 1e-4)
    v2 = hyp2f1_series(2.0, 0.5, 2.5, 1.0 - 1e-8)
    assert v2 - v1 == pytest.approx(0.75 * math.log(1e4), rel=0.02)


def test_hyp2f1_domain_errors():
    with pytest.raises(ValueError):
        hyp2f1_series(2.0, 0.5, 2.5, 1.0)
    with pytest.raises(ValueError):
        hyp2f1_series(2.0, 0.5, 2.5, -0.1)
    with pytest.raises(ValueError):
        hyp2f1_series(2.0, 0.5, -1.0, 0.3)


def test_quadrature_rule_dataclass():
    rule = QuadratureRule("chebyshev", np.array([0.0]), np.array([math.pi]))
    assert rule.kind == "chebyshev"
    assert len(rule) == 1
