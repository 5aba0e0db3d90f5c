"""Markov-chain jump samplers and the lag-one correlation estimator.

Four chains are provided, all targeting the normalised version of an
unnormalised density on a bounded domain:

``LocalMH``
    random-walk Metropolis/Hastings with a centred uniform proposal;
``LocalSF``
    grid-sampled stochastic step function whose resting time at each visited
    position equals the density there;
``AIMH``
    independent MH whose proposal is piecewise uniform over an adaptive
    subdivision of the domain;
``AISF``
    the step-function sampler run inside subdivision cells with per-cell
    local clocks, which keeps draws uncorrelated.

The inner loops live in the kernel backend (compiled or pure Python, see
:mod:`levysim._backend`). State that the kernels mutate is held in numpy
arrays or returned explicitly, so a sampler can be driven in chunks of any
size without changing its output stream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import get_kernels
from .measures import DensitySpec, estimate_sup
from .rng import as_stream
from .subdivision import DEFAULT_REBUILD_PERIOD, Subdivision, build

DEFAULT_BURN_IN = 10_000
DEFAULT_MAX_ITER = 1_000_000
_CHUNK = 1 << 16


class Sampler:
    """Stateful generator of a stream of variates."""

    name = "sampler"

    def __init__(self, density: DensitySpec, rng, backend=None):
        self.density = density
        self.stream = as_stream(rng, "sampler")
        self.backend = backend
        self._k = get_kernels(backend)
        self._u = self.stream.kernel_stream(backend)
        self._dens = self._k.DensityKernel(density)
        self.n_output = 0

    def draw(self, n: int) -> np.ndarray:
        """The next ``n`` values of the chain."""
        n = int(n)
        out = np.empty(n)
        done = 0
        while done < n:
            m = min(n - done, _CHUNK)
            done += self._fill(out[done:done + m])
        self.n_output += n
        return out

    def next(self) -> float:
        return float(self.draw(1)[0])

    def _fill(self, out: np.ndarray) -> int:
        raise NotImplementedError

    @property
    def n_evals(self) -> int:
        """Density evaluations so far, burn-in included."""
        return int(self._dens.n_evals)

    @property
    def n_uniforms(self) -> int:
        return int(self._u.n_drawn)


class LocalMH(Sampler):
    """Random-walk Metropolis/Hastings with proposal ``x + U(-width/2, width/2)``.

    Proposals outside the domain are rejected (and counted as rejections).
    The chain starts at ``start`` and discards ``burn_in`` steps.
    """

    name = "local-mh"

    def __init__(self, density, width, rng=None, burn_in=DEFAULT_BURN_IN, start=0.0, backend=None):
        if not width > 0:
            raise ValueError("width must be positive")
        super().__init__(density, rng, backend)
        self.width = float(width)
        self.lo, self.hi = density.support
        self.x = float(start)
        self.fx = density.evaluate(self.x)
        if not self.fx > 0:
            raise ValueError(f"density vanishes at the initial state {start}; cannot form MH ratio")
        self.n_accept = 0
        self.n_proposal = 0
        if burn_in:
            self.x, self.fx, _ = self._k.run_local_mh(
                self._dens, self._u, self.lo, self.hi, self.width, self.x, self.fx, int(burn_in), None
            )

    def _fill(self, out):
        n = out.shape[0]
        self.x, self.fx, acc = self._k.run_local_mh(
            self._dens, self._u, self.lo, self.hi, self.width, self.x, self.fx, n, out
        )
        self.n_accept += acc
        self.n_proposal += n
        return n

    @property
    def acceptance_rate(self) -> float:
        return self.n_accept / self.n_proposal if self.n_proposal else float("nan")


class LocalSF(Sampler):
    """Stochastic step function sampled on a uniform time grid.

    Positions come from an independent uniform proposal over the domain, or
    from a reflected random walk of total ``width`` when ``width`` is given.
    ``grid_dt`` defaults to an estimate of the density supremum (from
    ``sup_hint`` or a midpoint scan) and is then grown whenever a larger
    density value is seen, which keeps consecutive outputs distinct.
    """

    name = "local-sf"

    def __init__(self, density, rng=None, grid_dt=None, exponential_resting=False, width=None,
                 start=0.0, backend=None):
        super().__init__(density, rng, backend)
        self.auto_grid = grid_dt is None
        self.grid_dt = estimate_sup(density) if grid_dt is None else float(grid_dt)
        if not self.grid_dt > 0:
            raise ValueError("grid_dt must be positive")
        if width is not None and not width > 0:
            raise ValueError("width must be positive")
        self.width = 0.0 if width is None else float(width)
        self.exponential_resting = bool(exponential_resting)
        self.lo, self.hi = density.support
        self.s = float(start) if self.lo <= start <= self.hi else 0.5 * (self.lo + self.hi)
        self.residual = 0.0
        self.n_draws = 0

    def _fill(self, out):
        n = out.shape[0]
        self.s, self.residual, self.grid_dt, draws = self._k.run_local_sf(
            self._dens, self._u, self.lo, self.hi, self.width, self.grid_dt,
            self.exponential_resting, self.auto_grid, self.s, self.residual, n, out,
        )
        self.n_draws += draws
        return n


class _Adaptive(Sampler):
    def __init__(self, density, rng=None, n_cells=None,
                 rebuild_period=DEFAULT_REBUILD_PERIOD, subdivision: Subdivision | None = None,
                 backend=None):
        super().__init__(density, rng, backend)
        if subdivision is None:
            subdivision = build(density.support, density.excluded_origin_radius, n_cells, density,
                                rebuild_period, backend)
        self.sub = subdivision

    def _maybe_adapt(self):
        if self.sub.samples_since_rebuild >= self.sub.rebuild_period:
            self.sub.adapt()

    def lambda_estimate(self) -> float:
        return self.sub.lambda_estimate()


class AIMH(_Adaptive):
    """Adaptive independent Metropolis/Hastings over a subdivided domain."""

    name = "aimh"

    def __init__(self, density, rng=None, n_cells=None,
                 rebuild_period=DEFAULT_REBUILD_PERIOD, subdivision=None, start=0.0, backend=None):
        super().__init__(density, rng, n_cells, rebuild_period, subdivision, backend)
        self.cell = self.sub.cell_index(start)
        self.x = float(start)
        self.fx = density.evaluate(self.x) if self.cell >= 0 else 0.0
        if not self.fx > 0:
            # first proposal is accepted unconditionally
            self.cell = -1
        self.n_accept = 0
        self.n_proposal = 0

    def _fill(self, out):
        n = out.shape[0]
        done = 0
        s = self.sub
        while done < n:
            self._maybe_adapt()
            self.x, self.fx, self.cell, k, acc, s.samples_since_rebuild = self._k.run_aimh(
                self._dens, self._u, s.lo, s.width, s.weight, s.sup_estimate, s.sum_nu, s.count,
                s.alias.prob, s.alias.alias, self.x, self.fx, self.cell, n - done, out[done:],
                s.samples_since_rebuild, s.rebuild_period,
            )
            done += k
            self.n_accept += acc
            self.n_proposal += k
        return n

    @property
    def acceptance_rate(self) -> float:
        return self.n_accept / self.n_proposal if self.n_proposal else float("nan")


class AISF(_Adaptive):
    """Adaptive independent step-function sampler with per-cell local clocks."""

    name = "aisf"

    def __init__(self, density, rng=None, n_cells=None,
                 rebuild_period=DEFAULT_REBUILD_PERIOD, subdivision=None,
                 max_iter=DEFAULT_MAX_ITER, backend=None):
        super().__init__(density, rng, n_cells, rebuild_period, subdivision, backend)
        self.max_iter = int(max_iter)
        self.n_draws = 0

    def _fill(self, out):
        n = out.shape[0]
        done = 0
        s = self.sub
        while done < n:
            self._maybe_adapt()
            k, s.samples_since_rebuild, evals = self._k.run_aisf(
                self._dens, self._u, s.lo, s.width, s.sup_estimate, s.clock, s.sum_nu, s.count,
                s.alias.prob, s.alias.alias, n - done, out[done:], s.samples_since_rebuild,
                s.rebuild_period, self.max_iter,
            )
            done += k
            self.n_draws += evals
        return n


class IIDNormalSampler:
    """Independent N(mean, stddev^2) draws from numpy; the uncorrelated reference."""

    name = "iid"

    def __init__(self, mean=0.0, stddev=1.0, rng=None):
        self.mean = float(mean)
        self.stddev = float(stddev)
        self.stream = as_stream(rng, "sampler")
        self.n_output = 0

    def draw(self, n):
        self.n_output += int(n)
        return self.stream.normal(self.mean, self.stddev, int(n))

    def next(self):
        return float(self.draw(1)[0])


@dataclass(frozen=True)
class SamplerKind:
    """Sampler choice plus its tuning parameters, as read from a run config."""

    name: str
    width: float | None = None
    grid_dt: float | None = None
    exponential_resting: bool = False
    n_cells: int | None = None
    rebuild_period: int = DEFAULT_REBUILD_PERIOD

    def __post_init__(self):
        if self.name not in ("local-mh", "local-sf", "aimh", "aisf", "iid"):
            raise ValueError(f"unknown sampler {self.name!r}")
        if self.name == "local-mh" and not (self.width and self.width > 0):
            raise ValueError("local-mh needs a positive width")
        if self.grid_dt is not None and not self.grid_dt > 0:
            raise ValueError("grid_dt must be positive")

    def make(self, density: DensitySpec, rng, backend=None):
        if self.name == "local-mh":
            return LocalMH(density, self.width, rng, backend=backend)
        if self.name == "local-sf":
            return LocalSF(density, rng, self.grid_dt, self.exponential_resting, self.width,
                           backend=backend)
        if self.name == "aimh":
            return AIMH(density, rng, self.n_cells, self.rebuild_period, backend=backend)
        if self.name == "aisf":
            return AISF(density, rng, self.n_cells, self.rebuild_period, backend=backend)
        jumps = getattr(density, "jumps", None)
        if jumps is None:
            raise ValueError("the iid reference sampler needs a Gaussian jump density")
        return IIDNormalSampler(jumps.mean, jumps.stddev, rng)


def correlation(chain) -> float:
    """Lag-one sequential correlation ``E[(X_{i+1}-m)(X_i-m)] / var`` (biased variance)."""
    x = np.asarray(chain, dtype=np.float64)
    if x.size < 2:
        raise ValueError("need at least two values")
    d = x - x.mean()
    var = float(np.mean(d * d))
    if not var > 0:
        raise ValueError("chain has zero variance")
    return float(np.mean(d[1:] * d[:-1]) / var)


def mh_width_sweep(density: DensitySpec, widths, n: int, rng=None, burn_in=DEFAULT_BURN_IN,
                   backend=None):
    """Lag-one correlation of local MH chains of length ``n`` for each proposal width."""
    base = as_stream(rng, "sweep")
    rows = []
    for i, w in enumerate(widths):
        s = LocalMH(density, float(w), base.child(f"w{i}"), burn_in=burn_in, backend=backend)
        rows.append((float(w), correlation(s.draw(n))))
    return rows
