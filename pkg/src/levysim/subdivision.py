"""Adaptive subdivision of the jump domain into equal-width cells.

The subdivision carries the discrete distribution over cells used by the
adaptive independent samplers, a Walker alias table for O(1) cell draws,
running per-cell estimates of the density supremum, and the per-cell local
clocks of the step-function sampler.
"""

from __future__ import annotations

import csv
import importlib
import math

import numpy as np

from ._backend import get_kernels
from .analysis import fmt

WEIGHT_FLOOR = 1e-300
DEFAULT_REBUILD_PERIOD = 4096
DEFAULT_CELLS_PER_SIDE = 256


class AliasTable:
    """Walker alias table: ``draw`` returns ``i`` with probability ``w_i / sum(w)``."""

    def __init__(self, prob: np.ndarray, alias: np.ndarray):
        self.prob = prob
        self.alias = alias

    def __len__(self):
        return self.prob.shape[0]


def alias_build(weights, backend=None) -> AliasTable:
    """O(n) Vose construction; weights need not be normalised."""
    prob, alias = get_kernels(backend).alias_build(weights)
    return AliasTable(prob, alias)


def alias_draw(table: AliasTable, stream, size=None):
    """One cell index (or ``size`` of them) using one uniform and one comparison each.

    ``stream`` is a kernel uniform stream, see
    :meth:`levysim.rng.RandomStream.kernel_stream`.
    """
    k = importlib.import_module(type(stream).__module__)
    if size is None:
        return k.alias_draw(table.prob, table.alias, stream)
    return k.alias_draw_many(table.prob, table.alias, stream, int(size))


class Subdivision:
    """Disjoint cells ``[lo_i, hi_i)`` covering the domain minus ``(-eps, eps)``.

    Cell state is held column-wise in numpy arrays so the compiled kernels can
    update it in place.
    """

    def __init__(self, lo, hi, weight, sup_estimate, rebuild_period=DEFAULT_REBUILD_PERIOD,
                 backend=None):
        self.lo = np.ascontiguousarray(lo, dtype=np.float64)
        self.hi = np.ascontiguousarray(hi, dtype=np.float64)
        self.width = self.hi - self.lo
        if np.any(self.width <= 0):
            raise ValueError("every cell needs lo < hi")
        if np.any(self.lo[1:] < self.hi[:-1]):
            raise ValueError("cells must be ordered and disjoint")
        self.weight = np.maximum(np.asarray(weight, dtype=np.float64), WEIGHT_FLOOR)
        self.sup_estimate = np.ascontiguousarray(sup_estimate, dtype=np.float64).copy()
        self.clock = np.zeros(self.n_cells)
        self.sum_nu = np.zeros(self.n_cells)
        self.count = np.zeros(self.n_cells, dtype=np.int64)
        self.samples_since_rebuild = 0
        if rebuild_period < 1:
            raise ValueError("rebuild_period must be >= 1")
        self.rebuild_period = int(rebuild_period)
        self.backend = backend
        self.n_adaptations = 0
        self.alias = alias_build(self.weight, backend)

    @property
    def n_cells(self) -> int:
        return self.lo.shape[0]

    def rebuild_alias(self):
        self.alias = alias_build(self.weight, self.backend)

    def record_sample(self, cell: int, nu_value: float):
        if not math.isfinite(nu_value) or nu_value < 0:
            raise ValueError(f"recorded density value must be finite and >= 0, got {nu_value}")
        self.sum_nu[cell] += nu_value
        self.count[cell] += 1
        if nu_value > self.sup_estimate[cell]:
            self.sup_estimate[cell] = nu_value
        self.samples_since_rebuild += 1

    def mean_nu(self) -> np.ndarray:
        """Running mean of recorded density values per cell (NaN where unvisited)."""
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.count > 0, self.sum_nu / np.maximum(self.count, 1), np.nan)

    def adapt(self):
        """Replace visited cells' weights by (mean recorded density) x (cell width)."""
        visited = self.count > 0
        if np.any(visited):
            est = self.sum_nu[visited] / self.count[visited] * self.width[visited]
            self.weight[visited] = np.maximum(est, WEIGHT_FLOOR)
        self.rebuild_alias()
        self.samples_since_rebuild = 0
        self.n_adaptations += 1

    def lambda_estimate(self) -> float:
        """Estimated total mass of the density over the covered domain."""
        if not np.any(self.count > 0):
            raise ValueError("no cell has been visited yet")
        return float(self.weight.sum())

    def cell_index(self, x: float) -> int:
        """Index of the cell containing ``x``, or -1 if ``x`` is not covered."""
        i = int(np.searchsorted(self.lo, x, side="right")) - 1
        if i < 0:
            return -1
        if x < self.hi[i] or (i == self.n_cells - 1 and x == self.hi[i]):
            return i
        return -1

    def merge(self, other: "Subdivision") -> "Subdivision":
        """Combine accumulators of two subdivisions with identical geometry."""
        if not (np.array_equal(self.lo, other.lo) and np.array_equal(self.hi, other.hi)):
            raise ValueError("can only merge subdivisions with identical cells")
        out = Subdivision(self.lo, self.hi, self.weight, np.maximum(self.sup_estimate, other.sup_estimate),
                          self.rebuild_period, self.backend)
        out.sum_nu = self.sum_nu + other.sum_nu
        out.count = self.count + other.count
        out.adapt()
        return out

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["cell_lo", "cell_hi", "weight", "sup_estimate", "count"])
            for row in zip(self.lo, self.hi, self.weight, self.sup_estimate, self.count):
                w.writerow([fmt(row[0]), fmt(row[1]), fmt(row[2]), fmt(row[3]), int(row[4])])


def _split_cells(omega, excluded_radius, n_cells):
    lo, hi = float(omega[0]), float(omega[1])
    if not lo < hi:
        raise ValueError(f"omega must satisfy lo < hi, got {omega}")
    eps = float(excluded_radius)
    if eps < 0:
        raise ValueError("excluded_radius must be nonnegative")
    if eps == 0.0 or hi <= -eps or lo >= eps:
        pieces = [(lo, hi)]
    else:
        pieces = [p for p in ((lo, -eps), (eps, hi)) if p[1] > p[0]]
    if not pieces:
        raise ValueError("excluded interval covers the whole domain")
    if n_cells < len(pieces):
        raise ValueError(f"need at least {len(pieces)} cells to cover both sides of the origin")
    if len(pieces) == 1:
        counts = [n_cells]
    else:
        la = pieces[0][1] - pieces[0][0]
        lb = pieces[1][1] - pieces[1][0]
        na = min(max(int(round(n_cells * la / (la + lb))), 1), n_cells - 1)
        counts = [na, n_cells - na]
    los, his = [], []
    for (a, b), m in zip(pieces, counts):
        edges = np.linspace(a, b, m + 1)
        edges[0], edges[-1] = a, b
        los.append(edges[:-1])
        his.append(edges[1:])
    return np.concatenate(los), np.concatenate(his)


def default_cell_count(omega, excluded_radius) -> int:
    """``DEFAULT_CELLS_PER_SIDE`` cells on each side of the excluded origin interval."""
    lo, hi = float(omega[0]), float(omega[1])
    eps = float(excluded_radius)
    two_sided = eps > 0.0 and lo < -eps and hi > eps
    return DEFAULT_CELLS_PER_SIDE * (2 if two_sided else 1)


def build(omega, excluded_radius, n_cells, density, rebuild_period=DEFAULT_REBUILD_PERIOD,
          backend=None) -> Subdivision:
    """Equal-width cells over ``omega`` minus ``(-eps, eps)`` with midpoint initial weights.

    With a nonzero excluded radius the cells are shared between the two sides
    in proportion to their length. ``n_cells=None`` means
    :func:`default_cell_count`.
    """
    if n_cells is None:
        n_cells = default_cell_count(omega, excluded_radius)
    if n_cells < 1:
        raise ValueError("n_cells must be >= 1")
    lo, hi = _split_cells(omega, excluded_radius, int(n_cells))
    mid = 0.5 * (lo + hi)
    nu_mid = np.array([density.evaluate(float(m)) for m in mid])
    if not np.all(np.isfinite(nu_mid)):
        raise ValueError("density is not finite at every cell midpoint")
    if not np.any(nu_mid > 0):
        raise ValueError("density vanishes at every cell midpoint")
    return Subdivision(lo, hi, nu_mid * (hi - lo), nu_mid, rebuild_period, backend)
