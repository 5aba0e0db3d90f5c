"""Exact reference distributions of the simulated processes at a fixed time.

* Merton jump-diffusion: Poisson-mixture series density.
* NIG: closed-form density, characteristic function and an exact sampler
  by inverse-Gaussian subordination.
* CGMY: characteristic function, inverted numerically.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .analysis import fmt
from .measures import CGMYSpec, NIGSpec
from .rng import as_stream
from .specfun import bessel_k1, complex_power_array

_k1_vec = np.frompyfunc(bessel_k1, 1, 1)


def bessel_k1_array(x) -> np.ndarray:
    return np.asarray(_k1_vec(np.asarray(x, dtype=np.float64)), dtype=np.float64)


def merton_pdf(x, t: float, lam: float, sigma: float = 1.0, jump_mean: float = 0.0,
               jump_std: float = 1.0):
    """Density at time ``t`` of ``sigma W_t + sum_{i<=N_t} Y_i``, ``Y_i ~ N(jump_mean, jump_std^2)``.

    The Poisson series is summed until past the bulk of the Poisson weights
    (``k > lam t + 10 sqrt(lam t)``) and the last term is below 1e-16 of the
    running sum at every point.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    lt = lam * t
    k_min = lt + 10.0 * math.sqrt(lt)
    total = np.zeros_like(x)
    k = 0
    while True:
        if lt == 0.0:
            logw = 0.0 if k == 0 else -math.inf
        else:
            logw = -lt + k * math.log(lt) - math.lgamma(k + 1.0)
        var = sigma * sigma * t + jump_std * jump_std * k
        d = x - jump_mean * k
        term = np.exp(logw - d * d / (2.0 * var)) / math.sqrt(2.0 * math.pi * var)
        total += term
        if k > k_min and np.all(term <= 1e-16 * total):
            break
        if lt == 0.0:
            break
        k += 1
    return float(total[0]) if scalar else total


def merton_cf(u, t: float, lam: float, sigma: float = 1.0, jump_mean: float = 0.0,
              jump_std: float = 1.0):
    u = np.asarray(u, dtype=np.float64)
    jump_cf = np.exp(1j * jump_mean * u - 0.5 * jump_std * jump_std * u * u)
    return np.exp(lam * t * (jump_cf - 1.0) - 0.5 * sigma * sigma * t * u * u)


def nig_pdf(x, t: float, spec: NIGSpec, mu: float = 0.0):
    """NIG density of ``L_t`` (``delta -> delta t``, ``mu -> mu t``)."""
    if not t > 0:
        raise ValueError("t must be positive")
    a, b, d = spec.alpha, spec.beta, spec.delta * t
    gamma = math.sqrt(a * a - b * b)
    xm = np.asarray(x, dtype=np.float64) - mu * t
    r = np.sqrt(d * d + xm * xm)
    out = a * d / math.pi * np.exp(d * gamma + b * xm) * bessel_k1_array(a * r) / r
    return float(out) if np.ndim(out) == 0 else out


def nig_cf(u, t: float, spec: NIGSpec, mu: float = 0.0):
    u = np.asarray(u, dtype=np.float64)
    a, b, d = spec.alpha, spec.beta, spec.delta
    gamma = math.sqrt(a * a - b * b)
    z = a * a - (b + 1j * u) ** 2
    return np.exp(t * (1j * mu * u + d * (gamma - np.sqrt(z))))


def inverse_gaussian_sample(mean: float, shape: float, rng, size=None):
    """Michael-Schucany-Haas transformation sampler for IG(mean, shape)."""
    g = as_stream(rng, "nig").generator
    nu = g.standard_normal(size) ** 2
    m = mean
    y = m + m * m * nu / (2.0 * shape) - m / (2.0 * shape) * np.sqrt(4.0 * m * shape * nu + m * m * nu * nu)
    u = g.random(size)
    return np.where(u <= m / (m + y), y, m * m / y)


def inverse_gaussian_pdf(x, mean: float, shape: float):
    x = np.asarray(x, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.sqrt(shape / (2.0 * math.pi * x ** 3)) * np.exp(-shape * (x - mean) ** 2 / (2.0 * mean * mean * x))
    return np.where(x > 0, out, 0.0)


def nig_direct_sample(spec: NIGSpec, t: float, rng, size=None, mu: float = 0.0):
    """Exact draws of ``L_t``: ``mu t + beta Z + sqrt(Z) N`` with ``Z ~ IG(delta t / gamma, (delta t)^2)``."""
    stream = as_stream(rng, "nig")
    gamma = math.sqrt(spec.alpha ** 2 - spec.beta ** 2)
    dt = spec.delta * t
    z = inverse_gaussian_sample(dt / gamma, dt * dt, stream, size)
    n = stream.generator.standard_normal(size)
    out = mu * t + spec.beta * z + np.sqrt(z) * n
    return float(out) if size is None else out


def cgmy_cf(u, t: float, spec: CGMYSpec):
    """CGMY characteristic function using principal-branch complex powers (``0 < Y < 2``, ``Y != 1``)."""
    if not spec.y > 0:
        raise ValueError("CGMY characteristic function here needs Y > 0")
    if spec.y == 1.0:
        raise ValueError("Y = 1 is not supported (Gamma(-Y) is singular)")
    u = np.asarray(u, dtype=np.float64)
    y = spec.y
    bracket = (complex_power_array(spec.m - 1j * u, y) - spec.m ** y
               + complex_power_array(spec.g + 1j * u, y) - spec.g ** y)
    out = np.exp(t * spec.c * math.gamma(-y) * bracket)
    return complex(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class CfInversionSpec:
    u_max: float = 200.0
    n_points: int = 1 << 15
    x_grid: np.ndarray = field(default_factory=lambda: np.linspace(-6, 6, 121))
    truncation_tol: float = 1e-10

    def __post_init__(self):
        if not self.u_max > 0:
            raise ValueError("u_max must be positive")
        if self.n_points < 2:
            raise ValueError("n_points must be >= 2")
        if not np.all(np.isfinite(self.x_grid)):
            raise ValueError("x_grid must be finite")


class CfInversionError(ArithmeticError):
    pass


def cf_invert_pdf(cf, spec: CfInversionSpec):
    """Density from a characteristic function: trapezoid rule for ``(1/2pi) int e^{-iux} cf(u) du``.

    Returns an ``(n, 2)`` array of ``(x, density)`` rows.
    """
    u = np.linspace(-spec.u_max, spec.u_max, spec.n_points)
    du = u[1] - u[0]
    phi = np.asarray(cf(u), dtype=complex)
    edge = max(abs(phi[0]), abs(phi[-1]))
    if edge > spec.truncation_tol:
        raise CfInversionError(
            f"|cf(+-u_max)| = {edge:.3g} exceeds {spec.truncation_tol}; increase u_max"
        )
    w = np.full(spec.n_points, du)
    w[0] = w[-1] = 0.5 * du
    wphi = w * phi
    xs = np.asarray(spec.x_grid, dtype=np.float64).ravel()
    dens = np.empty(xs.size)
    chunk = max(1, (1 << 22) // spec.n_points)
    for i in range(0, xs.size, chunk):
        xc = xs[i:i + chunk]
        vals = np.exp(-1j * np.outer(xc, u)) @ wphi / (2.0 * math.pi)
        if np.max(np.abs(vals.imag)) >= 1e-10:
            raise CfInversionError(f"imaginary residue {np.max(np.abs(vals.imag)):.3g} too large")
        dens[i:i + chunk] = vals.real
    return np.column_stack([xs, dens])


def cf_interval_mass(cf, a: float, b: float, spec: CfInversionSpec | None = None) -> float:
    """``P(a <= X <= b)`` from a characteristic function.

    Integrates ``(1/2pi) int cf(u) (e^{-iua} - e^{-iub}) / (iu) du`` with the
    trapezoid rule on ``spec``'s frequency grid (``b - a`` at ``u = 0``).
    """
    spec = spec or CfInversionSpec()
    if not a < b:
        raise ValueError("need a < b")
    u = np.linspace(-spec.u_max, spec.u_max, spec.n_points)
    du = u[1] - u[0]
    phi = np.asarray(cf(u), dtype=complex)
    edge = max(abs(phi[0]), abs(phi[-1]))
    if edge > spec.truncation_tol:
        raise CfInversionError(f"|cf(+-u_max)| = {edge:.3g} exceeds {spec.truncation_tol}; increase u_max")
    kern = np.empty(u.shape, dtype=complex)
    nz = u != 0.0
    kern[nz] = (np.exp(-1j * u[nz] * a) - np.exp(-1j * u[nz] * b)) / (1j * u[nz])
    kern[~nz] = b - a
    w = np.full(spec.n_points, du)
    w[0] = w[-1] = 0.5 * du
    val = np.sum(w * phi * kern) / (2.0 * math.pi)
    if abs(val.imag) >= 1e-10:
        raise CfInversionError(f"imaginary residue {abs(val.imag):.3g} too large")
    return float(val.real)


def cgmy_pdf(x, t: float, spec: CGMYSpec, u_max: float = 200.0, n_points: int = 1 << 15):
    xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
    inv = CfInversionSpec(u_max, n_points, xs)
    out = cf_invert_pdf(lambda u: cgmy_cf(u, t, spec), inv)[:, 1].reshape(xs.shape)
    return float(out[0]) if np.ndim(x) == 0 else out.reshape(np.shape(x))


def write_density_csv(path, xs, density):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "density"])
        for x, d in zip(xs, density):
            w.writerow([fmt(x), fmt(d)])
