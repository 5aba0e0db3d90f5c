"""Histograms, L-infinity errors against exact densities, and convergence logs."""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass

import numpy as np

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def fmt(x: float) -> str:
    """17-significant-digit decimal used in every CSV."""
    return format(float(x), ".17g")


class Histogram:
    """Equal-width half-open bins ``[edge_k, edge_{k+1})`` on ``[lo, hi)`` with under/overflow."""

    def __init__(self, lo: float, hi: float, n_bins: int):
        if not lo < hi:
            raise ValueError("histogram needs lo < hi")
        if n_bins < 1:
            raise ValueError("n_bins must be >= 1")
        self.lo = float(lo)
        self.hi = float(hi)
        self.n_bins = int(n_bins)
        self.counts = np.zeros(self.n_bins, dtype=np.int64)
        self.n_total = 0
        self.n_underflow = 0
        self.n_overflow = 0

    @property
    def bin_width(self) -> float:
        return (self.hi - self.lo) / self.n_bins

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.n_bins + 1)

    @property
    def centers(self) -> np.ndarray:
        e = self.edges
        return 0.5 * (e[:-1] + e[1:])

    def _index(self, xs: np.ndarray) -> np.ndarray:
        idx = np.floor((xs - self.lo) / self.bin_width).astype(np.int64)
        # floating rounding right at an edge: trust the half-open comparison
        e = self.edges
        inside = (idx >= 0) & (idx < self.n_bins)
        j = np.clip(idx, 0, self.n_bins - 1)
        idx = np.where(inside & (xs < e[j]), idx - 1, idx)
        idx = np.where(inside & (xs >= e[j + 1]), idx + 1, idx)
        return idx

    def add(self, x: float):
        self.add_many(np.array([x], dtype=np.float64))

    def add_many(self, xs):
        xs = np.asarray(xs, dtype=np.float64).ravel()
        if not np.all(np.isfinite(xs)):
            raise ValueError("histogram values must be finite")
        under = xs < self.lo
        over = xs >= self.hi
        inside = ~(under | over)
        self.n_underflow += int(under.sum())
        self.n_overflow += int(over.sum())
        idx = self._index(xs[inside])
        np.add.at(self.counts, np.clip(idx, 0, self.n_bins - 1), 1)
        self.n_total += xs.size

    def merge(self, other: "Histogram") -> "Histogram":
        if (self.lo, self.hi, self.n_bins) != (other.lo, other.hi, other.n_bins):
            raise ValueError("can only merge histograms with identical binning")
        out = Histogram(self.lo, self.hi, self.n_bins)
        out.counts = self.counts + other.counts
        out.n_total = self.n_total + other.n_total
        out.n_underflow = self.n_underflow + other.n_underflow
        out.n_overflow = self.n_overflow + other.n_overflow
        return out

    __add__ = merge

    def density(self) -> np.ndarray:
        """Counts normalised by the total number of values, including out-of-range ones."""
        if self.n_total == 0:
            raise ValueError("empty histogram")
        return self.counts / (self.n_total * self.bin_width)

    def to_csv(self, path, exact_bins=None):
        emp = self.density()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["bin_center", "empirical_density", "exact_density"])
            for k, c in enumerate(self.centers):
                ex = "" if exact_bins is None else fmt(exact_bins[k])
                w.writerow([fmt(c), fmt(emp[k]), ex])


def bin_averages(exact_density, edges) -> np.ndarray:
    """Average of ``exact_density`` over each bin by 16-point Gauss-Legendre.

    ``exact_density`` must accept a numpy array.
    """
    edges = np.asarray(edges, dtype=np.float64)
    a, b = edges[:-1], edges[1:]
    half = 0.5 * (b - a)
    nodes = 0.5 * (a + b)[:, None] + half[:, None] * _GL_NODES[None, :]
    vals = np.asarray(exact_density(nodes.ravel()), dtype=np.float64).reshape(nodes.shape)
    return 0.5 * (vals * _GL_WEIGHTS[None, :]).sum(axis=1)


def linf_error(h: Histogram, exact_density=None, exact_bins=None) -> float:
    """Max over bins of |empirical density - bin-averaged exact density|."""
    if h.n_total == 0:
        raise ValueError("empty histogram")
    if exact_bins is None:
        if exact_density is None:
            raise ValueError("need exact_density or exact_bins")
        exact_bins = bin_averages(exact_density, h.edges)
    return float(np.max(np.abs(h.density() - exact_bins)))


def tail_mass(h: Histogram, threshold: float) -> float:
    """Fraction of all values with ``|x| > threshold``.

    Bins straddling ``+-threshold`` contribute the fraction of their width
    beyond it; under- and overflow count in full.
    """
    if not 0 < threshold < h.hi or not -threshold > h.lo:
        raise ValueError("threshold must lie strictly inside the histogram range")
    if h.n_total == 0:
        return 0.0
    e = h.edges
    a, b = e[:-1], e[1:]
    right = np.clip((b - np.maximum(a, threshold)) / (b - a), 0.0, 1.0)
    left = np.clip((np.minimum(b, -threshold) - a) / (b - a), 0.0, 1.0)
    frac = np.minimum(right + left, 1.0)
    mass = float((h.counts * frac).sum()) + h.n_underflow + h.n_overflow
    return mass / h.n_total


def exact_tail_mass(exact_density, threshold: float, lo: float, hi: float, n: int = 4000) -> float:
    """``P(|X| > threshold)`` for a density, integrated on ``[lo, -t]`` and ``[t, hi]``."""
    edges_r = np.linspace(threshold, hi, n + 1)
    edges_l = np.linspace(lo, -threshold, n + 1)
    r = bin_averages(exact_density, edges_r) * np.diff(edges_r)
    l = bin_averages(exact_density, edges_l) * np.diff(edges_l)
    return float(r.sum() + l.sum())


@dataclass(frozen=True)
class ConvergenceRecord:
    wall_seconds: float
    n_samples: int
    linf_error: float


def write_convergence_csv(records, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["wall_seconds", "n_samples", "linf_error"])
        for r in records:
            w.writerow([fmt(r.wall_seconds), int(r.n_samples), fmt(r.linf_error)])


def error_at_time(records, t: float) -> float:
    """Error of the last record at or before wall time ``t``."""
    best = None
    for r in records:
        if r.wall_seconds <= t:
            best = r
    if best is None:
        raise ValueError(f"no record at or before t={t}")
    return best.linf_error


def is_checkpoint(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


class Stopwatch:
    """Monotonic wall clock read only at checkpoint boundaries."""

    def __init__(self):
        self._t0 = time.perf_counter()

    def elapsed(self) -> float:
        return time.perf_counter() - self._t0


def write_rows_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if isinstance(v, float) else v for v in row])


def statistical_band(exact_bins, n: int, bin_width: float) -> np.ndarray:
    """Per-bin binomial standard deviation of the empirical density."""
    p = np.clip(exact_bins * bin_width, 0, 1)
    return np.sqrt(p * (1 - p) / n) / bin_width


def sigma_of_mass(p: float, n: int) -> float:
    return math.sqrt(max(p * (1 - p), 0.0) / n)
