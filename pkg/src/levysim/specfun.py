"""Special functions and 1-D quadrature used by the Lévy densities and oracles.

Only the handful of functions the densities need are provided: the modified
Bessel function K1, the lower incomplete gamma function, an adaptive Simpson
integrator and a principal-branch complex power.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

EULER_GAMMA = 0.57721566490153286061

_EPS = 1e-16
_MAXIT = 10000


class QuadratureError(ArithmeticError):
    """Raised when adaptive quadrature cannot reach the requested tolerance."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Integration interval and stopping rule for :func:`integrate`.

    ``improper`` flags endpoints where the integrand may not be evaluated
    (singular or undefined); those endpoints are nudged inwards.
    """

    a: float
    b: float
    abs_tol: float = 1e-10
    max_refinements: int = 50
    improper: tuple[bool, bool] = (False, False)

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"need a < b, got [{self.a}, {self.b}]")
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if self.max_refinements < 1:
            raise ValueError("max_refinements must be >= 1")


def _k1_series(x: float) -> float:
    # K1(x) = 1/x + ln(x/2) I1(x) - (x/4) sum_k [psi(k+1) + psi(k+2)] (x^2/4)^k / (k!(k+1)!)
    q = 0.25 * x * x
    term = 1.0
    psi1 = -EULER_GAMMA
    psi2 = 1.0 - EULER_GAMMA
    i1_sum = 0.0
    psi_sum = 0.0
    k = 0
    while True:
        i1_sum += term
        dpsi = (psi1 + psi2) * term
        psi_sum += dpsi
        k += 1
        term *= q / (k * (k + 1.0))
        psi1 += 1.0 / k
        psi2 += 1.0 / (k + 1.0)
        if term < _EPS * i1_sum and abs(dpsi) < _EPS * abs(psi_sum):
            break
    i1 = 0.5 * x * i1_sum
    return 1.0 / x + math.log(0.5 * x) * i1 - 0.25 * x * psi_sum


def _k1_steed(x: float) -> float:
    # Steed/Temme continued fraction for K0, then K1 = K0 (x + 1/2 - h) / x.
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = d
    delh = d
    q1 = 0.0
    q2 = 1.0
    a1 = 0.25
    q = a1
    c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, _MAXIT):
        a -= 2.0 * (i - 1)
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
        if abs(dels / s) < _EPS:
            break
    else:
        raise ArithmeticError(f"K1 continued fraction did not converge at x={x}")
    h = a1 * h
    k0 = math.sqrt(math.pi / (2.0 * x)) * math.exp(-x) / s
    return k0 * (x + 0.5 - h) / x


def bessel_k1(x: float) -> float:
    """Modified Bessel function of the second kind, order one.

    Series expansion for ``x <= 2``, Steed's continued fraction above.
    Underflows to 0 for very large ``x``.

    Raises
    ------
    ValueError
        If ``x <= 0``.
    """
    x = float(x)
    if not x > 0.0:
        raise ValueError(f"bessel_k1 requires x > 0, got {x}")
    if math.isinf(x):
        return 0.0
    if x <= 2.0:
        return _k1_series(x)
    return _k1_steed(x)


def _gamma_series(s: float, x: float) -> float:
    # gamma(s, x) = x^s e^-x sum_n x^n / (s (s+1) ... (s+n))
    ap = s
    term = 1.0 / s
    total = term
    for _ in range(_MAXIT):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            return total * math.exp(-x + s * math.log(x))
    raise ArithmeticError(f"incomplete gamma series did not converge (s={s}, x={x})")


def _upper_gamma_cf(s: float, x: float) -> float:
    # Modified Lentz evaluation of Gamma(s, x).
    tiny = 1e-300
    b = x + 1.0 - s
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _MAXIT):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return math.exp(-x + s * math.log(x)) * h
    raise ArithmeticError(f"incomplete gamma fraction did not converge (s={s}, x={x})")


def lower_incomplete_gamma(s: float, x: float) -> float:
    """Unnormalised lower incomplete gamma function ``int_0^x t^(s-1) e^-t dt``."""
    s = float(s)
    x = float(x)
    if not s > 0.0:
        raise ValueError(f"lower_incomplete_gamma requires s > 0, got {s}")
    if not x >= 0.0:
        raise ValueError(f"lower_incomplete_gamma requires x >= 0, got {x}")
    if x == 0.0:
        return 0.0
    if x < s + 1.0:
        return _gamma_series(s, x)
    if math.isinf(x):
        return math.gamma(s)
    return math.gamma(s) - _upper_gamma_cf(s, x)


def _simpson_refine(f, a, fa, b, fb, m, fm, whole, tol, depth, max_depth):
    # Iterative adaptive Simpson with Richardson correction.
    total = 0.0
    stack = [(a, fa, b, fb, m, fm, whole, tol, depth)]
    while stack:
        a, fa, b, fb, m, fm, whole, tol, depth = stack.pop()
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm = f(lm)
        frm = f(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        delta = left + right - whole
        if abs(delta) <= 15.0 * tol:
            total += left + right + delta / 15.0
            continue
        if depth >= max_depth:
            raise QuadratureError(
                f"adaptive Simpson exhausted {max_depth} refinements near [{a}, {b}]"
            )
        stack.append((a, fa, m, fm, lm, flm, left, 0.5 * tol, depth + 1))
        stack.append((m, fm, b, fb, rm, frm, right, 0.5 * tol, depth + 1))
    return total


def integrate(f: Callable[[float], float], spec: QuadratureSpec) -> float:
    """Integrate ``f`` over ``[spec.a, spec.b]`` by adaptive Simpson bisection.

    The interval is first split into 8 panels so that narrow features are not
    missed by the initial 3-point estimate.
    """
    a, b = spec.a, spec.b
    nudge = (b - a) * 1e-13
    lo = a + nudge if spec.improper[0] else a
    hi = b - nudge if spec.improper[1] else b
    n_panels = 8
    edges = np.linspace(lo, hi, n_panels + 1)
    panel_tol = spec.abs_tol / n_panels
    fvals = [float(f(e)) for e in edges]
    total = 0.0
    for i in range(n_panels):
        pa, pb = float(edges[i]), float(edges[i + 1])
        m = 0.5 * (pa + pb)
        fm = float(f(m))
        whole = (pb - pa) / 6.0 * (fvals[i] + 4.0 * fm + fvals[i + 1])
        total += _simpson_refine(
            f, pa, fvals[i], pb, fvals[i + 1], m, fm, whole, panel_tol, 0, spec.max_refinements
        )
    if not math.isfinite(total):
        raise QuadratureError("integrand produced a non-finite value")
    return total


def complex_power(z: complex, y: float) -> complex:
    """Principal-branch power ``exp(y * Log z)`` with ``arg z`` in ``(-pi, pi]``."""
    z = complex(z)
    if z == 0:
        if y > 0:
            return 0j
        raise ValueError("0 ** y is undefined for y <= 0")
    # -0.0 imaginary parts would select the branch at -pi
    z = complex(z.real, z.imag + 0.0)
    return cmath.exp(y * cmath.log(z))


def complex_power_array(z: np.ndarray, y: float) -> np.ndarray:
    """Vectorised :func:`complex_power` for arrays with no zero entries."""
    z = np.asarray(z, dtype=complex)
    z = z.real + 1j * (z.imag + 0.0)
    return np.exp(y * np.log(z))
