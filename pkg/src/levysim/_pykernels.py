"""Pure-Python sampler kernels.

Reference implementation of the hot loops in ``_ckernels.pyx``. Both modules
consume uniforms from the same block-buffered stream in the same order and
perform the same floating-point operations, so for a given seed they produce
bit-identical output. This module is used when the extension is not built or
when ``LEVYSIM_BACKEND=python``.
"""

import math

import numpy as np

BACKEND = "python"
DEFAULT_BLOCK = 65536


class UniformStream:
    """Uniform [0, 1) variates drawn in blocks from a numpy ``Generator``."""

    def __init__(self, generator, block=DEFAULT_BLOCK):
        if block < 1:
            raise ValueError("block must be >= 1")
        self._gen = generator
        self._block = int(block)
        self._buf = []
        self._pos = 0
        self.n_drawn = 0

    def _refill(self):
        self._buf = self._gen.random(self._block).tolist()
        self._pos = 0

    def uniform(self):
        if self._pos >= len(self._buf):
            self._refill()
        u = self._buf[self._pos]
        self._pos += 1
        self.n_drawn += 1
        return u


class DensityKernel:
    """Evaluates a :class:`~levysim.measures.DensitySpec` through its Python formula."""

    def __init__(self, density):
        self.density = density
        self._eval = density.evaluate
        self.n_evals = 0

    def __call__(self, x):
        self.n_evals += 1
        return self._eval(x)


def alias_build(weights):
    """Vose's O(n) construction of Walker alias tables."""
    w = np.asarray(weights, dtype=np.float64)
    n = w.size
    if n == 0:
        raise ValueError("alias table needs at least one weight")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise ValueError("alias weights must be finite and nonnegative")
    total = float(w.sum())
    if not total > 0:
        raise ValueError("alias weights must not all be zero")
    scaled = (w * (n / total)).tolist()
    prob = [0.0] * n
    alias = list(range(n))
    small = [i for i in range(n) if scaled[i] < 1.0]
    large = [i for i in range(n) if scaled[i] >= 1.0]
    while small and large:
        s = small.pop()
        l = large.pop()
        prob[s] = scaled[s]
        alias[s] = l
        scaled[l] = (scaled[l] + scaled[s]) - 1.0
        if scaled[l] < 1.0:
            small.append(l)
        else:
            large.append(l)
    for i in large:
        prob[i] = 1.0
    for i in small:
        prob[i] = 1.0
    return np.array(prob), np.array(alias, dtype=np.int64)


def alias_draw(prob, alias, rng):
    n = prob.shape[0]
    v = rng.uniform() * n
    i = int(v)
    if i >= n:
        i = n - 1
    if v - i < prob[i]:
        return i
    return int(alias[i])


def alias_draw_many(prob, alias, rng, n):
    out = np.empty(n, dtype=np.int64)
    for k in range(n):
        out[k] = alias_draw(prob, alias, rng)
    return out


def run_local_mh(dens, rng, lo, hi, width, x, fx, n, out):
    """Random-walk MH with uniform proposals of total ``width``; out-of-domain proposals are rejections."""
    n_accept = 0
    for k in range(n):
        y = x + width * (rng.uniform() - 0.5)
        if lo <= y <= hi:
            fy = dens(y)
            if fy >= fx or rng.uniform() * fx < fy:
                x = y
                fx = fy
                n_accept += 1
        if out is not None:
            out[k] = x
    return x, fx, n_accept


def _sf_propose(s, rng, lo, hi, width):
    if width <= 0.0:
        return lo + (hi - lo) * rng.uniform()
    y = s + width * (rng.uniform() - 0.5)
    while y < lo or y > hi:
        if y < lo:
            y = 2.0 * lo - y
        else:
            y = 2.0 * hi - y
    return y


def run_local_sf(dens, rng, lo, hi, width, grid_dt, exp_rest, auto_grid, s, residual, n, out):
    """Grid-sample a stochastic step function whose resting time at ``s`` is ``nu(s)``.

    ``residual`` is the time left in the current resting interval after the
    previous grid instant. The output at a grid instant is the position whose
    half-open resting interval contains it.
    """
    n_draws = 0
    for k in range(n):
        need = grid_dt
        while residual <= need:
            need -= residual
            s = _sf_propose(s, rng, lo, hi, width)
            f = dens(s)
            n_draws += 1
            if auto_grid and f > grid_dt:
                grid_dt = f
            if exp_rest:
                residual = -f * math.log(1.0 - rng.uniform())
            else:
                residual = f
        residual -= need
        out[k] = s
    return s, residual, grid_dt, n_draws


def run_aimh(dens, rng, cell_lo, cell_width, weight, sup, sum_nu, count, prob, alias,
             x, fx, cell, n, out, since, period):
    """Independent MH with a piecewise-uniform proposal drawn through the alias table.

    Stops early (after the step that reaches it) once ``since >= period`` so the
    caller can adapt the subdivision. Returns
    ``(x, fx, cell, n_done, n_accept, since)``.
    """
    n_accept = 0
    n_cells = prob.shape[0]
    k = 0
    while k < n:
        v = rng.uniform() * n_cells
        j = int(v)
        if j >= n_cells:
            j = n_cells - 1
        if not v - j < prob[j]:
            j = int(alias[j])
        y = cell_lo[j] + cell_width[j] * rng.uniform()
        fy = dens(y)
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
            accept = num >= den or rng.uniform() * den < num
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


def run_aisf(dens, rng, cell_lo, cell_width, sup, clock, sum_nu, count, prob, alias,
             n, out, since, period, max_iter):
    """Adaptive independent step-function sampler with per-cell local clocks.

    Returns ``(n_done, since, n_evals)``.
    """
    n_cells = prob.shape[0]
    n_evals = 0
    k = 0
    while k < n:
        v = rng.uniform() * n_cells
        j = int(v)
        if j >= n_cells:
            j = n_cells - 1
        if not v - j < prob[j]:
            j = int(alias[j])
        lo_j = cell_lo[j]
        w_j = cell_width[j]
        t = clock[j]
        it = 0
        while True:
            xx = lo_j + w_j * rng.uniform()
            f = dens(xx)
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
