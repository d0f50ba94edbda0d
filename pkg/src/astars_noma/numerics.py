"""Special-function and quadrature kernel for the closed-form evaluators.

Everything in this module is a pure function of its arguments (no module
state), so it is safe to call concurrently from any number of threads.
Only numpy is required.

Contents
--------
* regularized / plain lower incomplete gamma (series + continued fraction)
* modified Bessel functions: exponentially scaled I0/I1 and general K_nu
* the half-order Laguerre polynomial L_{1/2} used by Rician moments
* Gauss-Laguerre rules via the Golub-Welsch tridiagonal eigenproblem
* Gauss-Chebyshev (first kind) node sets
* the Gauss hypergeometric series 2F1(a, b; c; z) on [0, 1)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "QuadratureRule",
    "bessel_k",
    "gauss_chebyshev_nodes",
    "gauss_laguerre_rule",
    "hyp2f1_series",
    "laguerre_half",
    "lower_incomplete_gamma",
    "reg_lower_gamma",
]

_EULER_GAMMA = 0.57721566490153286061
_TOL = 1.0e-15
_MAX_ITER = 20000


@dataclass(frozen=True)
class QuadratureRule:
    """Abscissae and weights of a fixed quadrature rule.

    kind is "laguerre" (weight e^{-t} on (0, inf), weights sum to 1) or
    "chebyshev" (first-kind nodes cos((2u-1)pi/2U) with the uniform weight
    pi/U attached; the caller composes the sqrt(1-x^2) factor).  Nodes are
    stored strictly increasing and the arrays are read-only.
    """

    kind: str
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.nodes.flags.writeable = False
        self.weights.flags.writeable = False

    def __len__(self) -> int:
        return len(self.nodes)


# ---------------------------------------------------------------------------
# Incomplete gamma
# ---------------------------------------------------------------------------

def _p_series(a: float, x: np.ndarray) -> np.ndarray:
    """P(a,x) by the ascending series, valid (and fast) for x < a + 1."""
    out = np.zeros_like(x)
    pos = x > 0.0
    if not np.any(pos):
        return out
    xs = x[pos]
    term = np.ones_like(xs)
    total = np.ones_like(xs)
    denom = a
    for _ in range(_MAX_ITER):
        denom += 1.0
        term = term * xs / denom
        total += term
        if np.all(term < _TOL * total):
            break
    else:  # pragma: no cover - series is geometric-fast in this regime
        raise RuntimeError("incomplete gamma series failed to converge")
    out[pos] = np.exp(a * np.log(xs) - xs - math.lgamma(a + 1.0)) * total
    return out


def _q_contfrac(a: float, x: np.ndarray) -> np.ndarray:
    """Q(a,x) by the Lentz continued fraction, for x >= a + 1."""
    tiny = 1.0e-300
    b = x + 1.0 - a
    c = np.full_like(x, 1.0e300)
    d = 1.0 / np.where(np.abs(b) < tiny, tiny, b)
    h = d.copy()
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < tiny, tiny, d)
        c = b + an / c
        c = np.where(np.abs(c) < tiny, tiny, c)
        d = 1.0 / d
        delta = d * c
        h = h * delta
        if np.all(np.abs(delta - 1.0) < _TOL):
            break
    else:  # pragma: no cover
        raise RuntimeError("incomplete gamma continued fraction failed to converge")
    return np.exp(-x + a * np.log(x) - math.lgamma(a)) * h


def reg_lower_gamma(a: float, x):
    """Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a).

    Ascending series for x < a + 1, Lentz continued fraction for the
    complement otherwise; both iterated to ~1e-15.  ``x`` may be a scalar
    or an ndarray (the shape ``a`` is a scalar).
    """
    if a <= 0.0:
        raise ValueError(f"gamma shape must be positive, got a={a}")
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(arr < 0.0):
        raise ValueError("incomplete gamma argument must be nonnegative")
    out = np.empty_like(arr)
    lo = arr < a + 1.0
    if np.any(lo):
        out[lo] = _p_series(a, arr[lo])
    if np.any(~lo):
        out[~lo] = 1.0 - _q_contfrac(a, arr[~lo])
    if np.ndim(x) == 0:
        return float(out[0])
    return out


def lower_incomplete_gamma(a: float, x: float) -> float:
    """Lower incomplete gamma gamma(a, x) = int_0^x t^{a-1} e^{-t} dt.

    Nondecreasing in x and bounded by Gamma(a).  Uses the regularized
    routine internally, so the shape must keep Gamma(a) representable in
    float64 (a <~ 171).
    """
    if a <= 0.0:
        raise ValueError(f"gamma shape must be positive, got a={a}")
    if x < 0.0:
        raise ValueError(f"integration limit must be nonnegative, got x={x}")
    return math.gamma(a) * float(reg_lower_gamma(a, x))


# ---------------------------------------------------------------------------
# Modified Bessel functions
# ---------------------------------------------------------------------------

def _bessel_i01e(x: float) -> tuple[float, float]:
    """Exponentially scaled e^{-x} I0(x) and e^{-x} I1(x), x >= 0.

    Power series (all terms positive, no cancellation) below x = 20, the
    large-argument asymptotic expansion above.
    """
    if x < 0.0:
        raise ValueError("scaled Bessel I defined here for x >= 0 only")
    if x == 0.0:
        return 1.0, 0.0
    if x < 20.0:
        t = 0.25 * x * x
        term0 = 1.0
        s0 = 1.0
        term1 = 1.0
        s1 = 1.0
        k = 0
        while term0 > _TOL * s0 or term1 > _TOL * s1:
            k += 1
            term0 *= t / (k * k)
            term1 *= t / (k * (k + 1))
            s0 += term0
            s1 += term1
            if k > 500:  # pragma: no cover
                raise RuntimeError("Bessel I series failed to converge")
        scale = math.exp(-x)
        return scale * s0, scale * s1 * 0.5 * x
    # asymptotic: e^{-x} I_nu(x) ~ (2 pi x)^{-1/2} sum_k (-)^k a_k(nu)/x^k
    out = []
    for mu in (0.0, 4.0):  # mu = 4 nu^2
        s = 1.0
        term = 1.0
        for k in range(1, 40):
            factor = -(mu - (2 * k - 1) ** 2) / (8.0 * k * x)
            new = term * factor
            if abs(new) >= abs(term):
                break
            term = new
            s += term
            if abs(term) < _TOL * abs(s):
                break
        out.append(s / math.sqrt(2.0 * math.pi * x))
    return out[0], out[1]


def laguerre_half(x: float) -> float:
    """Half-order Laguerre polynomial L_{1/2}(x).

    Closed form e^{x/2} [(1 - x) I0(-x/2) - x I1(-x/2)].  For x = -kappa
    (the Rician-moment use) the Bessel factors are evaluated in scaled form
    so arbitrarily large kappa cannot overflow; L_{1/2}(-kappa) is then
    increasing in kappa with L_{1/2}(0) = 1.
    """
    if x <= 0.0:
        k = -x
        i0e, i1e = _bessel_i01e(0.5 * k)
        return (1.0 + k) * i0e + k * i1e
    i0e, i1e = _bessel_i01e(0.5 * x)
    return math.exp(x) * ((1.0 - x) * i0e + x * i1e)


# mu^2 coefficient of Gamma1: -(euler^3/6 - euler pi^2/12 + zeta(3)/3)
_GAM1_C2 = 0.042002635034095235529


def _chepolsums(mu: float) -> tuple[float, float, float, float]:
    """gam1, gam2, 1/Gamma(1+mu), 1/Gamma(1-mu) for |mu| <= 1/2.

    gam1 = (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu); the mu -> 0 limit is
    -euler_gamma, approached through a Taylor step to dodge the 0/0
    cancellation near integer orders.
    """
    gampl = 1.0 / math.gamma(1.0 + mu)
    gammi = 1.0 / math.gamma(1.0 - mu)
    if abs(mu) < 1.0e-5:
        gam1 = -_EULER_GAMMA + _GAM1_C2 * mu * mu
    else:
        gam1 = (gammi - gampl) / (2.0 * mu)
    gam2 = 0.5 * (gammi + gampl)
    return gam1, gam2, gampl, gammi


def bessel_k(order: float, x: float) -> float:
    """Modified Bessel function of the second kind K_nu(x), x > 0.

    Real order, with the symmetry K_{-nu} = K_nu.  Temme's series is used
    for x <= 2 and a Steed-type continued fraction for x > 2, both for the
    fractional part |mu| <= 1/2 of the order, followed by the (stable)
    upward recurrence K_{mu+j+1} = K_{mu+j-1} + 2(mu+j)/x K_{mu+j}.
    """
    if x <= 0.0:
        raise ValueError(f"K_nu requires x > 0, got x={x}")
    nu = abs(float(order))
    nl = int(nu + 0.5)
    mu = nu - nl
    mu2 = mu * mu
    if x <= 2.0:
        # Temme series
        x2 = 0.5 * x
        pimu = math.pi * mu
        fact = 1.0 if abs(pimu) < 1.0e-15 else pimu / math.sin(pimu)
        d = -math.log(x2)
        e = mu * d
        fact2 = 1.0 if abs(e) < 1.0e-15 else math.sinh(e) / e
        gam1, gam2, gampl, gammi = _chepolsums(mu)
        ff = fact * (gam1 * math.cosh(e) + gam2 * fact2 * d)
        total = ff
        e = math.exp(e)
        p = 0.5 * e / gampl
        q = 0.5 / (e * gammi)
        c = 1.0
        d = x2 * x2
        total1 = p
        for i in range(1, _MAX_ITER):
            ff = (i * ff + p + q) / (i * i - mu2)
            c *= d / i
            p /= (i - mu)
            q /= (i + mu)
            delta = c * ff
            total += delta
            total1 += c * (p - i * ff)
            if abs(delta) < abs(total) * _TOL:
                break
        else:  # pragma: no cover
            raise RuntimeError("Bessel K series failed to converge")
        k_mu = total
        k_mu1 = total1 * 2.0 / x
    else:
        # Steed continued fraction CF2
        b = 2.0 * (1.0 + x)
        d = 1.0 / b
        h = delh = d
        q1 = 0.0
        q2 = 1.0
        a1 = 0.25 - mu2
        q = c = a1
        a = -a1
        s = 1.0 + q * delh
        for i in range(2, _MAX_ITER):
            a -= 2 * (i - 1)
            c = -a * c / i
            qnew = (q1 - b * q2) / a
            q1 = q2
            q2 = qnew
            q += c * qnew
            b += 2.0
            d = 1.0 / (b + a * d)
            delh = (b * d - 1.0) * delh
            h += delh
            dels = q * delh
            s += dels
            if abs(dels / s) < _TOL:
                break
        else:  # pragma: no cover
            raise RuntimeError("Bessel K continued fraction failed to converge")
        h = a1 * h
        k_mu = math.sqrt(math.pi / (2.0 * x)) * math.exp(-x) / s
        k_mu1 = k_mu * (mu + x + 0.5 - h) / x
    for j in range(nl):
        k_mu, k_mu1 = k_mu1, (mu + j + 1.0) * (2.0 / x) * k_mu1 + k_mu
    return k_mu


# ---------------------------------------------------------------------------
# Quadrature rules
# ---------------------------------------------------------------------------

def _laguerre_pair(size: int, y: np.ndarray):
    """L_size(y) and L_{size-1}(y) as (mantissa, mantissa, log-scale).

    Three-term recurrence with per-node renormalization so the true values
    mantissa * exp(scale) never overflow even for thousands of terms at
    arguments of a few thousand.
    """
    prev = np.ones_like(y)        # L_0
    cur = 1.0 - y                 # L_1
    scale = np.zeros_like(y)
    for n in range(1, size):
        prev, cur = cur, ((2.0 * n + 1.0 - y) * cur - n * prev) / (n + 1.0)
        mag = np.maximum(np.abs(cur), np.abs(prev))
        wild = (mag > 1.0e100) | ((mag > 0.0) & (mag < 1.0e-100))
        if np.any(wild):
            factor = np.where(wild, mag, 1.0)
            prev /= factor
            cur /= factor
            scale += np.log(factor)
    return cur, prev, scale


@lru_cache(maxsize=64)
def gauss_laguerre_rule(size: int) -> QuadratureRule:
    """Gauss-Laguerre rule: sum_k w_k f(y_k) = int_0^inf e^{-t} f(t) dt,
    exact for polynomials of degree <= 2K - 1.

    Golub-Welsch seeding: the nodes start as eigenvalues of the symmetric
    tridiagonal Jacobi matrix (diagonal 2i+1, off-diagonal i) and are then
    Newton-polished on the Laguerre recurrence to full relative precision.
    Weights come from the derivative identity w_k = 1/(y_k L_K'(y_k)^2)
    evaluated in log form; tail weights whose true value sits below the
    float64 subnormal range are floored at the smallest subnormal so every
    weight stays strictly positive.  Weights sum to 1 = int e^{-t} dt.
    """
    if not 1 <= size <= 2000:
        raise ValueError(f"Gauss-Laguerre size must be in [1, 2000], got {size}")
    idx = np.arange(size, dtype=float)
    jacobi = np.diag(2.0 * idx + 1.0)
    if size > 1:
        off = np.arange(1, size, dtype=float)
        jacobi += np.diag(off, 1) + np.diag(off, -1)
    nodes = np.linalg.eigvalsh(jacobi)
    # Newton steps: L_K'(y) = K (L_K(y) - L_{K-1}(y)) / y
    for _ in range(3):
        lk, lkm1, _ = _laguerre_pair(size, nodes)
        nodes = nodes - lk * nodes / (size * (lk - lkm1))
    lk, lkm1, scale = _laguerre_pair(size, nodes)
    log_deriv = np.log(size * np.abs(lk - lkm1) / nodes) + scale
    log_w = -np.log(nodes) - 2.0 * log_deriv
    with np.errstate(under="ignore"):
        weights = np.exp(log_w)
    weights = np.maximum(weights, np.finfo(float).smallest_subnormal)
    return QuadratureRule("laguerre", nodes.copy(), weights)


@lru_cache(maxsize=64)
def gauss_chebyshev_nodes(size: int) -> QuadratureRule:
    """First-kind Chebyshev nodes cos((2u-1)pi/2U), sorted ascending, with
    the uniform weight pi/U attached:

        int_{-1}^{1} f(x)/sqrt(1-x^2) dx = (pi/U) sum_u f(x_u)

    exact for f of degree <= 2U - 1.  Callers integrating a plain dx
    measure multiply f by sqrt(1-x_u^2) themselves.
    """
    if not 1 <= size <= 10_000:
        raise ValueError(f"Gauss-Chebyshev size must be in [1, 10^4], got {size}")
    u = np.arange(1, size + 1, dtype=float)
    nodes = np.cos((2.0 * u - 1.0) * math.pi / (2.0 * size))[::-1]
    weights = np.full(size, math.pi / size)
    return QuadratureRule("chebyshev", nodes.copy(), weights)


# ---------------------------------------------------------------------------
# Gauss hypergeometric series
# ---------------------------------------------------------------------------

def _digamma(x: float) -> float:
    """psi(x) for x > 0: recurrence below 12, asymptotic series above."""
    if x <= 0.0:
        raise ValueError("digamma implemented for positive arguments only")
    acc = 0.0
    while x < 12.0:
        acc -= 1.0 / x
        x += 1.0
    f = 1.0 / (x * x)
    tail = f * (1.0 / 12 - f * (1.0 / 120 - f * (1.0 / 252 - f * (
        1.0 / 240 - f * (1.0 / 132 - f * 691.0 / 32760)))))
    return acc + math.log(x) - 0.5 / x - tail


def _hyp2f1_direct(a: float, b: float, c: float, z: float) -> float:
    term = 1.0
    total = 1.0
    for n in range(_MAX_ITER):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z
        total += term
        if abs(term) < _TOL * abs(total):
            return total
    raise RuntimeError("2F1 power series failed to converge; "
                       "argument too close to 1 for this (a, b, c)")


def _hyp2f1_balanced(a: float, b: float, z: float) -> float:
    """2F1(a, b; a+b; z) near z = 1 via the logarithmic connection series

        G(a+b)/(G(a)G(b)) sum_n ((a)_n (b)_n / (n!)^2)
            * (2 psi(n+1) - psi(a+n) - psi(b+n) - ln(1-z)) (1-z)^n,

    which converges rapidly arbitrarily close to the z = 1 singularity.
    """
    w = 1.0 - z
    log_term = -math.log(w)
    pref = math.gamma(a + b) / (math.gamma(a) * math.gamma(b))
    psi_n = -_EULER_GAMMA  # psi(1)
    psi_a = _digamma(a)
    psi_b = _digamma(b)
    poch = 1.0  # (a)_n (b)_n / (n!)^2 * w^n
    total = 0.0
    for n in range(_MAX_ITER):
        delta = poch * (2.0 * psi_n - psi_a - psi_b + log_term)
        total += delta
        if n > 0 and abs(delta) < _TOL * abs(total):
            return pref * total
        poch *= (a + n) * (b + n) / ((n + 1.0) ** 2) * w
        psi_n += 1.0 / (n + 1.0)
        psi_a += 1.0 / (a + n)
        psi_b += 1.0 / (b + n)
    raise RuntimeError("2F1 connection series failed to converge")  # pragma: no cover


def hyp2f1_series(a: float, b: float, c: float, z: float) -> float:
    """Gauss hypergeometric function 2F1(a, b; c; z) for 0 <= z < 1.

    Direct power series with a term-size stopping test for z <= 0.5.
    Closer to the singular point the series is rearranged around 1 - z:
    the logarithmic connection series when c = a + b (the case used by
    the high-SNR constants, divergent at z = 1 itself) and the standard
    two-term linear transformation when c - a - b is not an integer.
    z = 1 is always rejected; consumers of the balanced case must pass a
    regularized argument strictly below 1.
    """
    if not 0.0 <= z < 1.0:
        raise ValueError(f"2F1 series requires 0 <= z < 1, got z={z}")
    if c <= 0.0 and c == round(c):
        raise ValueError(f"2F1 undefined for nonpositive integer c={c}")
    if z <= 0.5:
        return _hyp2f1_direct(a, b, c, z)
    s = c - a - b
    if abs(s) < 1.0e-12:
        return _hyp2f1_balanced(a, b, z)
    if abs(s - round(s)) > 1.0e-9:
        w = 1.0 - z
        t1 = (math.gamma(c) * math.gamma(s) / (math.gamma(c - a) * math.gamma(c - b))
              * _hyp2f1_direct(a, b, 1.0 - s, w))
        t2 = (w ** s * math.gamma(c) * math.gamma(-s) / (math.gamma(a) * math.gamma(b))
              * _hyp2f1_direct(c - a, c - b, 1.0 + s, w))
        return t1 + t2
    # nonzero integer c-a-b: the direct series still converges for z < 1
    return _hyp2f1_direct(a, b, c, z)
