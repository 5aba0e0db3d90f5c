# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled sampler kernels.

Operation-for-operation transcription of ``_pykernels``; keep the two in sync.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, sqrt, fabs, pow, M_PI

cnp.import_array()

BACKEND = "cython"
DEFAULT_BLOCK = 65536

# kernel dispatch codes, mirrored from levysim.measures
cdef enum:
    KIND_CALLABLE = 0
    KIND_GAUSSIAN = 1
    KIND_TWO_MODE = 2
    KIND_NIG = 3
    KIND_CGMY = 4
    KIND_CONSTANT = 5
    KIND_PIECEWISE = 6

cdef double EULER_GAMMA = 0.57721566490153286061
cdef double _EPS = 1e-16
cdef int _MAXIT = 10000


cdef double _k1_series(double x) noexcept nogil:
    cdef double q = 0.25 * x * x
    cdef double term = 1.0
    cdef double psi1 = -EULER_GAMMA
    cdef double psi2 = 1.0 - EULER_GAMMA
    cdef double i1_sum = 0.0
    cdef double psi_sum = 0.0
    cdef double dpsi
    cdef long k = 0
    while True:
        i1_sum += term
        dpsi = (psi1 + psi2) * term
        psi_sum += dpsi
        k += 1
        term *= q / (k * (k + 1.0))
        psi1 += 1.0 / k
        psi2 += 1.0 / (k + 1.0)
        if term < _EPS * i1_sum and fabs(dpsi) < _EPS * fabs(psi_sum):
            break
    cdef double i1 = 0.5 * x * i1_sum
    return 1.0 / x + log(0.5 * x) * i1 - 0.25 * x * psi_sum


cdef double _k1_steed(double x) noexcept nogil:
    cdef double b = 2.0 * (1.0 + x)
    cdef double d = 1.0 / b
    cdef double h = d
    cdef double delh = d
    cdef double q1 = 0.0
    cdef double q2 = 1.0
    cdef double a1 = 0.25
    cdef double q = a1
    cdef double c = a1
    cdef double a = -a1
    cdef double s = 1.0 + q * delh
    cdef double qnew, dels
    cdef long i
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
        if fabs(dels / s) < _EPS:
            break
    h = a1 * h
    cdef double k0 = sqrt(M_PI / (2.0 * x)) * exp(-x) / s
    return k0 * (x + 0.5 - h) / x


cdef double bessel_k1_c(double x) noexcept nogil:
    if x <= 2.0:
        return _k1_series(x)
    return _k1_steed(x)


def bessel_k1(double x):
    """Compiled K1 (no argument checking; see ``levysim.specfun.bessel_k1``)."""
    return bessel_k1_c(x)


cdef class UniformStream:
    """Uniform [0, 1) variates drawn in blocks from a numpy ``Generator``."""

    cdef object _gen
    cdef double[::1] _buf
    cdef Py_ssize_t _pos
    cdef Py_ssize_t _len
    cdef Py_ssize_t _block
    cdef public long long n_drawn

    def __init__(self, generator, block=DEFAULT_BLOCK):
        if block < 1:
            raise ValueError("block must be >= 1")
        self._gen = generator
        self._block = block
        self._buf = np.empty(0)
        self._pos = 0
        self._len = 0
        self.n_drawn = 0

    cdef int _refill(self) except -1:
        self._buf = self._gen.random(self._block)
        self._len = self._buf.shape[0]
        self._pos = 0
        return 0

    cdef inline double next(self) except? -1.0:
        if self._pos >= self._len:
            self._refill()
        cdef double u = self._buf[self._pos]
        self._pos += 1
        self.n_drawn += 1
        return u

    def uniform(self):
        return self.next()


cdef class DensityKernel:
    """C evaluation of the densities in ``levysim.measures``; other kinds call back into Python."""

    cdef int kind
    cdef double lo, hi, eps
    cdef double[::1] params
    cdef double p0, p1, p2, p3
    cdef Py_ssize_t n_pieces
    cdef object _pyeval
    cdef public object density
    cdef public long long n_evals

    def __init__(self, density):
        self.density = density
        self.kind = density.kernel_kind
        self.lo, self.hi = density.support
        self.eps = density.excluded_origin_radius
        self.params = np.ascontiguousarray(density.kernel_params, dtype=np.float64)
        self._pyeval = density.evaluate
        self.n_evals = 0
        cdef Py_ssize_t m = self.params.shape[0]
        self.p0 = self.params[0] if m > 0 else 0.0
        self.p1 = self.params[1] if m > 1 else 0.0
        self.p2 = self.params[2] if m > 2 else 0.0
        self.p3 = self.params[3] if m > 3 else 0.0
        self.n_pieces = m - 2 if self.kind == KIND_PIECEWISE else 0

    cdef double eval(self, double x) except? -1.0:
        cdef double d, ax
        cdef Py_ssize_t k
        self.n_evals += 1
        if self.kind == KIND_CALLABLE:
            return self._pyeval(x)
        if x < self.lo or x > self.hi or fabs(x) < self.eps:
            return 0.0
        if self.kind == KIND_GAUSSIAN:
            d = x - self.p1
            return self.p0 * exp(-d * d * self.p2)
        if self.kind == KIND_NIG:
            ax = fabs(x)
            return self.p0 * exp(self.p2 * x) * bessel_k1_c(self.p1 * ax) / ax
        if self.kind == KIND_CGMY:
            if x > 0:
                return self.p0 * exp(-self.p2 * x) / pow(x, self.p3)
            ax = -x
            return self.p0 * exp(-self.p1 * ax) / pow(ax, self.p3)
        if self.kind == KIND_TWO_MODE:
            if x < 0.25 or (0.5 <= x and x < 0.75):
                return 1.0
            return 0.01
        if self.kind == KIND_CONSTANT:
            return self.p0
        if self.kind == KIND_PIECEWISE:
            k = <Py_ssize_t>((x - self.p0) * self.p1)
            if k < 0:
                k = 0
            if k > self.n_pieces - 1:
                k = self.n_pieces - 1
            return self.params[2 + k]
        return self._pyeval(x)

    def __call__(self, double x):
        return self.eval(x)


def alias_build(weights):
    """Vose's O(n) construction of Walker alias tables."""
    cdef cnp.ndarray[double, ndim=1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t n = w.shape[0]
    if n == 0:
        raise ValueError("alias table needs at least one weight")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise ValueError("alias weights must be finite and nonnegative")
    cdef double total = float(w.sum())
    if not total > 0:
        raise ValueError("alias weights must not all be zero")
    cdef double[::1] scaled = w * (n / total)
    prob_arr = np.zeros(n)
    alias_arr = np.arange(n, dtype=np.int64)
    cdef double[::1] prob = prob_arr
    cdef long long[::1] alias = alias_arr
    cdef long long[::1] small = np.empty(n, dtype=np.int64)
    cdef long long[::1] large = np.empty(n, dtype=np.int64)
    cdef Py_ssize_t ns = 0, nl = 0, i
    cdef long long s, l
    for i in range(n):
        if scaled[i] < 1.0:
            small[ns] = i
            ns += 1
    for i in range(n):
        if not scaled[i] < 1.0:
            large[nl] = i
            nl += 1
    while ns > 0 and nl > 0:
        ns -= 1
        s = small[ns]
        nl -= 1
        l = large[nl]
        prob[s] = scaled[s]
        alias[s] = l
        scaled[l] = (scaled[l] + scaled[s]) - 1.0
        if scaled[l] < 1.0:
            small[ns] = l
            ns += 1
        else:
            large[nl] = l
            nl += 1
    for i in range(nl):
        prob[large[i]] = 1.0
    for i in range(ns):
        prob[small[i]] = 1.0
    return prob_arr, alias_arr


cdef inline Py_ssize_t _alias_draw(double[::1] prob, long long[::1] alias,
                                   UniformStream rng) except -1:
    cdef Py_ssize_t n = prob.shape[0]
    cdef double v = rng.next() * n
    cdef Py_ssize_t i = <Py_ssize_t>v
    if i >= n:
        i = n - 1
    if v - i < prob[i]:
        return i
    return alias[i]


def alias_draw(double[::1] prob, long long[::1] alias, UniformStream rng):
    return _alias_draw(prob, alias, rng)


def alias_draw_many(double[::1] prob, long long[::1] alias, UniformStream rng, Py_ssize_t n):
    out_arr = np.empty(n, dtype=np.int64)
    cdef long long[::1] out = out_arr
    cdef Py_ssize_t k
    for k in range(n):
        out[k] = _alias_draw(prob, alias, rng)
    return out_arr


def run_local_mh(DensityKernel dens, UniformStream rng, double lo, double hi, double width,
                 double x, double fx, Py_ssize_t n, double[::1] out):
    cdef long long n_accept = 0
    cdef Py_ssize_t k
    cdef double y, fy
    cdef bint store = out is not None
    for k in range(n):
        y = x + width * (rng.next() - 0.5)
        if lo <= y and y <= hi:
            fy = dens.eval(y)
            if fy >= fx or rng.next() * fx < fy:
                x = y
                fx = fy
                n_accept += 1
        if store:
            out[k] = x
    return x, fx, n_accept


cdef inline double _sf_propose(double s, UniformStream rng, double lo, double hi,
                               double width) except? -1.0:
    if width <= 0.0:
        return lo + (hi - lo) * rng.next()
    cdef double y = s + width * (rng.next() - 0.5)
    while y < lo or y > hi:
        if y < lo:
            y = 2.0 * lo - y
        else:
            y = 2.0 * hi - y
    return y


def run_local_sf(DensityKernel dens, UniformStream rng, double lo, double hi, double width,
                 double grid_dt, bint exp_rest, bint auto_grid, double s, double residual,
                 Py_ssize_t n, double[::1] out):
    cdef long long n_draws = 0
    cdef Py_ssize_t k
    cdef double need, f
    for k in range(n):
        need = grid_dt
        while residual <= need:
            need -= residual
            s = _sf_propose(s, rng, lo, hi, width)
            f = dens.eval(s)
            n_draws += 1
            if auto_grid and f > grid_dt:
                grid_dt = f
            if exp_rest:
                residual = -f * log(1.0 - rng.next())
            else:
                residual = f
        residual -= need
        out[k] = s
    return s, residual, grid_dt, n_draws


def run_aimh(DensityKernel dens, UniformStream rng, double[::1] cell_lo, double[::1] cell_width,
             double[::1] weight, double[::1] sup, double[::1] sum_nu, long long[::1] count,
             double[::1] prob, long long[::1] alias, double x, double fx, Py_ssize_t cell,
             Py_ssize_t n, double[::1] out, long long since, long long period):
    cdef long long n_accept = 0
    cdef Py_ssize_t n_cells = prob.shape[0]
    cdef Py_ssize_t k = 0, j
    cdef double v, y, fy, num, den
    cdef bint accept
    while k < n:
        v = rng.next() * n_cells
        j = <Py_ssize_t>v
        if j >= n_cells:
            j = n_cells - 1
        if not v - j < prob[j]:
            j = alias[j]
        y = cell_lo[j] + cell_width[j] * rng.next()
        fy = dens.eval(y)
        sum_nu[j] += fy
        count[j] += 1
        if fy > sup[j]:
            sup[j] = fy
        since += 1
        if cell < 0:
            accept = True
        else:
            num = fy * cell_width[j] * weight[cell]
            den = fx * cell_width[cell] * weight[j]
            accept = num >= den or rng.next() * den < num
        if accept:
            x = y
            fx = fy
            cell = j
            n_accept += 1
        out[k] = x
        k += 1
        if since >= period:
            break
    return x, fx, cell, k, n_accept, since


def run_aisf(DensityKernel dens, UniformStream rng, double[::1] cell_lo, double[::1] cell_width,
             double[::1] sup, double[::1] clock, double[::1] sum_nu, long long[::1] count,
             double[::1] prob, long long[::1] alias, Py_ssize_t n, double[::1] out,
             long long since, long long period, long long max_iter):
    cdef Py_ssize_t n_cells = prob.shape[0]
    cdef long long n_evals = 0, it
    cdef Py_ssize_t k = 0, j
    cdef double v, lo_j, w_j, t, xx = 0.0, f
    while k < n:
        v = rng.next() * n_cells
        j = <Py_ssize_t>v
        if j >= n_cells:
            j = n_cells - 1
        if not v - j < prob[j]:
            j = alias[j]
        lo_j = cell_lo[j]
        w_j = cell_width[j]
        t = clock[j]
        it = 0
        while True:
            xx = lo_j + w_j * rng.next()
            f = dens.eval(xx)
            sum_nu[j] += f
            count[j] += 1
            if f > sup[j]:
                sup[j] = f
            since += 1
            t += f
            it += 1
            if t > sup[j]:
                break
            if it >= max_iter:
                clock[j] = t
                raise RuntimeError(
                    f"AISF exceeded {max_iter} iterations in cell {j} "
                    f"[{lo_j}, {lo_j + w_j}] (sup estimate {sup[j]})"
                )
        clock[j] = t - sup[j]
        n_evals += it
        out[k] = xx
        k += 1
        if since >= period:
            break
    return k, since, n_evals
