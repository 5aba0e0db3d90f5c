"""Unnormalised Lévy densities, their truncations and small-jump volatilities.

Every density is a :class:`DensitySpec`: a scalar ``evaluate`` that is zero
outside the simulation domain and inside the excluded origin interval
``(-eps, eps)``, plus a ``kernel_kind``/``kernel_params`` pair that lets the
compiled sampler core evaluate the same formula without calling back into
Python.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .specfun import QuadratureSpec, bessel_k1, integrate, lower_incomplete_gamma

# kernel dispatch codes shared with the compiled core
KIND_CALLABLE = 0
KIND_GAUSSIAN = 1
KIND_TWO_MODE = 2
KIND_NIG = 3
KIND_CGMY = 4
KIND_CONSTANT = 5
KIND_PIECEWISE = 6

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class GaussianJumpSpec:
    mean: float = 0.0
    stddev: float = 1.0

    def __post_init__(self):
        if not self.stddev > 0:
            raise ValueError("stddev must be positive")


@dataclass(frozen=True)
class NIGSpec:
    alpha: float
    beta: float
    delta: float

    def __post_init__(self):
        if not self.alpha > abs(self.beta):
            raise ValueError(f"NIG requires alpha > |beta| (alpha={self.alpha}, beta={self.beta})")
        if not self.delta > 0:
            raise ValueError("NIG requires delta > 0")


@dataclass(frozen=True)
class CGMYSpec:
    c: float
    g: float
    m: float
    y: float

    def __post_init__(self):
        if not (self.c > 0 and self.g > 0 and self.m > 0):
            raise ValueError("CGMY requires C, G, M > 0")
        if not self.y < 2:
            raise ValueError(f"CGMY requires Y < 2, got {self.y}")


class DensitySpec:
    """Unnormalised density on a bounded domain ``support = (lo, hi)``.

    Subclasses implement :meth:`_raw` (the density formula) and set
    ``kernel_kind``/``kernel_params``.
    """

    kernel_kind = KIND_CALLABLE

    def __init__(self, support, excluded_origin_radius=0.0, sup_hint=None):
        lo, hi = float(support[0]), float(support[1])
        if not lo < hi:
            raise ValueError(f"support must satisfy lo < hi, got {support}")
        if excluded_origin_radius < 0:
            raise ValueError("excluded_origin_radius must be nonnegative")
        if sup_hint is not None and not sup_hint > 0:
            raise ValueError("sup_hint must be positive")
        self.support = (lo, hi)
        self.excluded_origin_radius = float(excluded_origin_radius)
        self.sup_hint = None if sup_hint is None else float(sup_hint)

    @property
    def kernel_params(self) -> np.ndarray:
        return np.empty(0)

    def _raw(self, x: float) -> float:
        raise NotImplementedError

    def evaluate(self, x: float) -> float:
        lo, hi = self.support
        if x < lo or x > hi or abs(x) < self.excluded_origin_radius:
            return 0.0
        return self._raw(x)

    __call__ = evaluate

    def evaluate_array(self, xs) -> np.ndarray:
        return np.array([self.evaluate(float(x)) for x in np.ravel(xs)]).reshape(np.shape(xs))

    def pieces(self) -> list[tuple[float, float]]:
        """The domain minus the excluded origin interval, as closed intervals."""
        lo, hi = self.support
        eps = self.excluded_origin_radius
        if eps == 0.0 or hi <= -eps or lo >= eps:
            return [(lo, hi)]
        out = []
        if lo < -eps:
            out.append((lo, -eps))
        if hi > eps:
            out.append((eps, hi))
        return out

    def with_support(self, support) -> "DensitySpec":
        raise NotImplementedError


class GaussianDensity(DensitySpec):
    """``scale`` times the N(mean, stddev^2) density."""

    kernel_kind = KIND_GAUSSIAN

    def __init__(self, mean=0.0, stddev=1.0, scale=1.0, support=(-8.0, 8.0)):
        self.jumps = GaussianJumpSpec(mean, stddev)
        self.scale = float(scale)
        self._c0 = self.scale / (stddev * _SQRT_2PI)
        self._c1 = 0.5 / (stddev * stddev)
        super().__init__(support, 0.0, self._c0)

    @property
    def kernel_params(self):
        return np.array([self._c0, self.jumps.mean, self._c1])

    def _raw(self, x):
        d = x - self.jumps.mean
        return self._c0 * math.exp(-d * d * self._c1)

    def with_support(self, support):
        return GaussianDensity(self.jumps.mean, self.jumps.stddev, self.scale, support)

    def __repr__(self):
        return (f"GaussianDensity(mean={self.jumps.mean}, stddev={self.jumps.stddev}, "
                f"scale={self.scale}, support={self.support})")


def eval_two_mode(x: float) -> float:
    """Two strong modes on [0, 1]: 1 on [0, .25) and [.5, .75), 0.01 elsewhere."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"two-mode density is defined on [0, 1], got {x}")
    if x < 0.25 or 0.5 <= x < 0.75:
        return 1.0
    return 0.01


class TwoModeDensity(DensitySpec):
    kernel_kind = KIND_TWO_MODE

    def __init__(self):
        super().__init__((0.0, 1.0), 0.0, 1.0)

    def _raw(self, x):
        return eval_two_mode(x)

    def __repr__(self):
        return "TwoModeDensity()"


def eval_nig_levy(spec: NIGSpec, x: float) -> float:
    """NIG Lévy density ``(alpha delta / (pi |x|)) exp(beta x) K1(alpha |x|)``."""
    if x == 0:
        raise ValueError("NIG Lévy density diverges at x = 0")
    ax = abs(x)
    return spec.alpha * spec.delta / math.pi * math.exp(spec.beta * x) * bessel_k1(spec.alpha * ax) / ax


class NIGLevyDensity(DensitySpec):
    """NIG Lévy density restricted to ``support`` minus ``(-eps, eps)``."""

    kernel_kind = KIND_NIG

    def __init__(self, spec: NIGSpec, eps: float, support=(-25.0, 25.0)):
        if not eps > 0:
            raise ValueError("NIG density needs a positive origin cutoff eps")
        self.spec = spec
        self._c0 = spec.alpha * spec.delta / math.pi
        super().__init__(support, eps, None)
        # density is monotone decreasing in |x|, so the supremum sits at +-eps
        self.sup_hint = max(eval_nig_levy(spec, eps), eval_nig_levy(spec, -eps))

    @property
    def kernel_params(self):
        s = self.spec
        return np.array([self._c0, s.alpha, s.beta])

    def _raw(self, x):
        ax = abs(x)
        return self._c0 * math.exp(self.spec.beta * x) * bessel_k1(self.spec.alpha * ax) / ax

    def with_support(self, support):
        return NIGLevyDensity(self.spec, self.excluded_origin_radius, support)

    def __repr__(self):
        return f"NIGLevyDensity({self.spec}, eps={self.excluded_origin_radius}, support={self.support})"


def eval_cgmy_levy(spec: CGMYSpec, x: float) -> float:
    """CGMY Lévy density ``C exp(-M x) / x^(1+Y)`` (x > 0), ``G`` on the left."""
    if x == 0:
        raise ValueError("CGMY Lévy density diverges at x = 0")
    if x > 0:
        return spec.c * math.exp(-spec.m * x) / x ** (1.0 + spec.y)
    ax = -x
    return spec.c * math.exp(-spec.g * ax) / ax ** (1.0 + spec.y)


class CGMYLevyDensity(DensitySpec):
    kernel_kind = KIND_CGMY

    def __init__(self, spec: CGMYSpec, eps: float, support=(-25.0, 25.0)):
        if not eps > 0:
            raise ValueError("CGMY density needs a positive origin cutoff eps")
        self.spec = spec
        super().__init__(support, eps, None)
        self.sup_hint = max(eval_cgmy_levy(spec, eps), eval_cgmy_levy(spec, -eps))

    @property
    def kernel_params(self):
        s = self.spec
        return np.array([s.c, s.g, s.m, 1.0 + s.y])

    def _raw(self, x):
        s = self.spec
        p = 1.0 + s.y
        if x > 0:
            return s.c * math.exp(-s.m * x) / x ** p
        ax = -x
        return s.c * math.exp(-s.g * ax) / ax ** p

    def with_support(self, support):
        return CGMYLevyDensity(self.spec, self.excluded_origin_radius, support)

    def __repr__(self):
        return f"CGMYLevyDensity({self.spec}, eps={self.excluded_origin_radius}, support={self.support})"


class ConstantDensity(DensitySpec):
    kernel_kind = KIND_CONSTANT

    def __init__(self, value=1.0, support=(0.0, 1.0)):
        if not value > 0:
            raise ValueError("constant density value must be positive")
        self.value = float(value)
        super().__init__(support, 0.0, self.value)

    @property
    def kernel_params(self):
        return np.array([self.value])

    def _raw(self, x):
        return self.value

    def __repr__(self):
        return f"ConstantDensity({self.value}, support={self.support})"


class PiecewiseConstantDensity(DensitySpec):
    """Step density taking ``values[k]`` on the k-th of equal-width cells."""

    kernel_kind = KIND_PIECEWISE

    def __init__(self, values, support=(0.0, 1.0)):
        values = np.asarray(values, dtype=float)
        if values.ndim != 1 or values.size == 0 or np.any(values < 0):
            raise ValueError("values must be a nonempty 1-D array of nonnegative numbers")
        self.values = values
        super().__init__(support, 0.0, float(values.max()) or None)
        self._inv_width = values.size / (self.support[1] - self.support[0])

    @property
    def kernel_params(self):
        return np.concatenate([[self.support[0], self._inv_width], self.values])

    def _raw(self, x):
        k = int((x - self.support[0]) * self._inv_width)
        k = min(max(k, 0), self.values.size - 1)
        return float(self.values[k])


class CallableDensity(DensitySpec):
    """Wraps an arbitrary Python callable; evaluated through the slow path."""

    def __init__(self, func: Callable[[float], float], support, excluded_origin_radius=0.0,
                 sup_hint=None):
        self.func = func
        super().__init__(support, excluded_origin_radius, sup_hint)

    def _raw(self, x):
        return float(self.func(x))


def estimate_sup(density: DensitySpec, n_scan: int = 10_000, inflate: float = 1.1) -> float:
    """``sup_hint`` if set, otherwise a 10%-inflated midpoint scan."""
    if density.sup_hint is not None:
        return density.sup_hint
    best = 0.0
    for a, b in density.pieces():
        h = (b - a) / n_scan
        for k in range(n_scan):
            best = max(best, density.evaluate(a + (k + 0.5) * h))
    if not best > 0:
        raise ValueError("density vanishes on every scanned point")
    return inflate * best


def nig_params_from_ct(sigma: float, theta: float, kappa: float) -> NIGSpec:
    """Convert the (sigma, theta, kappa) subordination parametrisation to (alpha, beta, delta)."""
    if not (sigma > 0 and kappa > 0):
        raise ValueError("sigma and kappa must be positive")
    s2 = sigma * sigma
    return NIGSpec(
        alpha=math.sqrt(theta * theta + s2 / kappa) / s2,
        beta=theta / s2,
        delta=sigma / math.sqrt(kappa),
    )


def small_jump_sigma_nig(eps: float, spec: NIGSpec) -> float:
    """Small-jump volatility from the small-|x| law ``nu(x) ~ delta / (pi x^2)``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    return math.sqrt(2.0 * eps * spec.delta / math.pi)


def small_jump_sigma_nig_exact(eps: float, spec: NIGSpec, abs_tol: float = 1e-14) -> float:
    """Small-jump volatility from quadrature of ``x^2 nu(x)`` over ``[-eps, eps]``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    f = lambda x: x * x * eval_nig_levy(spec, x)
    q = QuadratureSpec(0.0, eps, abs_tol, 60, (True, False))
    right = integrate(f, q)
    left = integrate(lambda x: f(-x), q)
    return math.sqrt(left + right)


def small_jump_sigma_cgmy(eps: float, spec: CGMYSpec) -> float:
    """Exact small-jump volatility of CGMY via the lower incomplete gamma function.

    ``sigma^2 = C [M^(Y-2) gamma(2-Y, M eps) + G^(Y-2) gamma(2-Y, G eps)]``.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if not spec.y < 2:
        raise ValueError("small-jump variance requires Y < 2")
    s = 2.0 - spec.y
    var = spec.c * (
        spec.m ** (spec.y - 2.0) * lower_incomplete_gamma(s, spec.m * eps)
        + spec.g ** (spec.y - 2.0) * lower_incomplete_gamma(s, spec.g * eps)
    )
    return math.sqrt(var)


def asmussen_rosinski_ok(spec: CGMYSpec) -> bool:
    """Whether the Brownian small-jump approximation is valid (``0 < Y <= 1``)."""
    return 0.0 < spec.y <= 1.0


def truncated_intensity(density: DensitySpec, quad: QuadratureSpec | None = None) -> float:
    """Reference jump intensity: quadrature of the density over its pieces.

    ``quad`` supplies tolerance and refinement depth; its interval is ignored
    in favour of the density's own domain.
    """
    abs_tol = 1e-10 if quad is None else quad.abs_tol
    depth = 60 if quad is None else quad.max_refinements
    total = 0.0
    pieces = density.pieces()
    for a, b in pieces:
        total += integrate(density.evaluate, QuadratureSpec(a, b, abs_tol / len(pieces), depth))
    return total
