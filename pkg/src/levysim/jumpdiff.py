"""Jump-diffusion paths ``L_t = mu t + sigma_B W_t + sum_{j <= N_t} V_j``.

The jump values of consecutive jumps, within a path and across paths, are
consecutive values of one persistent sampler chain. That is the setting in
which chain correlations distort the terminal distribution, and the reason
the uncorrelated step-function samplers matter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analysis import ConvergenceRecord, Histogram, Stopwatch, bin_averages, is_checkpoint, linf_error
from .measures import (CGMYLevyDensity, DensitySpec, NIGLevyDensity, asmussen_rosinski_ok,
                       small_jump_sigma_cgmy, small_jump_sigma_nig, truncated_intensity)
from .rng import RandomStream
from .samplers import SamplerKind

DEFAULT_WARMUP = 10_000
_MAX_CHUNK = 4096


@dataclass(frozen=True)
class JumpDiffusionConfig:
    drift: float = 0.0
    brownian_vol: float = 0.0
    intensity: float = 0.0
    horizon: float = 1.0
    jump_density: DensitySpec | None = None
    jump_sampler: SamplerKind | None = None
    lambda_mode: str = "fixed"

    def __post_init__(self):
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if self.brownian_vol < 0:
            raise ValueError("brownian_vol must be nonnegative")
        if self.intensity < 0:
            raise ValueError("intensity must be nonnegative")
        if self.lambda_mode not in ("fixed", "adaptive"):
            raise ValueError("lambda_mode must be 'fixed' or 'adaptive'")
        if self.jumps_enabled:
            if self.jump_density is None or self.jump_sampler is None:
                raise ValueError("jumps need both a jump density and a jump sampler")
            if self.lambda_mode == "fixed" and not self.intensity > 0:
                raise ValueError("fixed-intensity jumps need intensity > 0")
            if self.lambda_mode == "adaptive" and self.jump_sampler.name not in ("aimh", "aisf"):
                raise ValueError("adaptive intensity needs a subdivision-based sampler")

    @property
    def jumps_enabled(self) -> bool:
        return self.intensity > 0 or self.lambda_mode == "adaptive"


@dataclass
class PathSample:
    terminal: float
    jump_times: np.ndarray
    jump_values: np.ndarray
    drift_part: float = 0.0
    brownian_part: float = 0.0
    jump_part: float = 0.0

    @property
    def n_jumps(self) -> int:
        return int(self.jump_values.shape[0])


def draw_jump_times(lam: float, T: float, rng) -> np.ndarray:
    """Sorted jump times on ``[0, T]``: Poisson(lam T) count, then uniform positions."""
    if not (lam > 0 and T > 0):
        raise ValueError("lam and T must be positive")
    g = rng.generator if isinstance(rng, RandomStream) else rng
    n = g.poisson(lam * T)
    return np.sort(g.uniform(0.0, T, n))


class JumpDiffusionProcess:
    """A simulable jump-diffusion with its own sampler chain and named random streams.

    The sampler is warmed up by ``warmup`` discarded variates (which also
    seeds the intensity estimate in adaptive mode).
    """

    def __init__(self, config: JumpDiffusionConfig, seed: int = 0, warmup: int = DEFAULT_WARMUP,
                 backend=None, stream_prefix: str = ""):
        self.config = config
        self.seed = int(seed)
        p = stream_prefix
        self.counts_rng = RandomStream(seed, p + "counts")
        self.times_rng = RandomStream(seed, p + "times")
        self.brownian_rng = RandomStream(seed, p + "brownian")
        self.sampler = None
        self.intensity = float(config.intensity)
        if config.jumps_enabled:
            self.sampler = config.jump_sampler.make(config.jump_density, RandomStream(seed, p + "jumps"),
                                                    backend)
            if warmup:
                self.sampler.draw(warmup)
            self._refresh_intensity()
        self.n_paths = 0

    def _refresh_intensity(self):
        if self.config.lambda_mode == "adaptive":
            self.intensity = self.sampler.lambda_estimate()

    def simulate_terminal(self) -> PathSample:
        """One path; jump times are drawn (unlike in the batch path) and returned."""
        c = self.config
        drift = c.drift * c.horizon
        bm = c.brownian_vol * math.sqrt(c.horizon) * float(self.brownian_rng.normal())
        if self.sampler is not None and self.intensity > 0:
            times = draw_jump_times(self.intensity, c.horizon, self.times_rng)
            values = self.sampler.draw(times.shape[0])
        else:
            times = np.empty(0)
            values = np.empty(0)
        jumps = float(values.sum())
        self.n_paths += 1
        self._refresh_intensity()
        return PathSample(drift + bm + jumps, times, values, drift, bm, jumps)

    def simulate_terminals(self, n: int) -> np.ndarray:
        """Terminal values of the next ``n`` paths (counts drawn per path, jumps from one chain)."""
        c = self.config
        n = int(n)
        z = self.brownian_rng.normal(size=n)
        out = c.drift * c.horizon + c.brownian_vol * math.sqrt(c.horizon) * z
        if self.sampler is not None and self.intensity > 0:
            counts = self.counts_rng.poisson(self.intensity * c.horizon, n)
            values = self.sampler.draw(int(counts.sum()))
            owner = np.repeat(np.arange(n), counts)
            out = out + np.bincount(owner, weights=values, minlength=n)
        self.n_paths += n
        self._refresh_intensity()
        return out

    def simulate_batch(self, n_paths: int, hist: Histogram, exact_density=None, exact_bins=None,
                       max_chunk: int = _MAX_CHUNK):
        """Accumulate ``n_paths`` terminals into ``hist``.

        Returns convergence records taken at every power-of-two path count
        and at the end (empty if no exact density is given).
        """
        if n_paths < 1:
            raise ValueError("n_paths must be >= 1")
        if exact_bins is None and exact_density is not None:
            exact_bins = bin_averages(exact_density, hist.edges)
        records = []
        clock = Stopwatch()
        done = 0
        while done < n_paths:
            nxt = 1 << done.bit_length()  # next power of two above done
            m = min(nxt - done, max_chunk, n_paths - done)
            hist.add_many(self.simulate_terminals(m))
            done += m
            if exact_bins is not None and (is_checkpoint(done) or done == n_paths):
                records.append(ConvergenceRecord(clock.elapsed(), done, linf_error(hist, exact_bins=exact_bins)))
        return records


def simulate_terminal(config: JumpDiffusionConfig, seed: int = 0, backend=None) -> PathSample:
    return JumpDiffusionProcess(config, seed, backend=backend).simulate_terminal()


def _run_shard(args):
    config, seed, shard, n_paths, lo, hi, n_bins, warmup, backend = args
    proc = JumpDiffusionProcess(config, seed, warmup, backend, stream_prefix=f"w{shard}/")
    h = Histogram(lo, hi, n_bins)
    proc.simulate_batch(n_paths, h)
    return h


def simulate_terminal_batch(config: JumpDiffusionConfig, n_paths: int, hist: Histogram, seed: int = 0,
                            exact_density=None, warmup: int = DEFAULT_WARMUP, workers: int = 1,
                            backend=None):
    """Histogram of ``n_paths`` terminal values plus convergence records.

    ``workers > 1`` shards paths over processes, each with its own chain and
    streams; histograms are merged and a single final record is returned.
    Only ``workers == 1`` is bit-reproducible against other worker counts.
    """
    exact_bins = None if exact_density is None else bin_averages(exact_density, hist.edges)
    if workers <= 1:
        proc = JumpDiffusionProcess(config, seed, warmup, backend)
        records = proc.simulate_batch(n_paths, hist, exact_bins=exact_bins)
        return hist, records, proc
    from concurrent.futures import ProcessPoolExecutor

    sizes = [n_paths // workers + (1 if i < n_paths % workers else 0) for i in range(workers)]
    jobs = [(config, seed, i, s, hist.lo, hist.hi, hist.n_bins, warmup, backend)
            for i, s in enumerate(sizes) if s > 0]
    clock = Stopwatch()
    with ProcessPoolExecutor(max_workers=workers) as ex:
        parts = list(ex.map(_run_shard, jobs))
    merged = hist
    for h in parts:
        merged = merged.merge(h)
    records = []
    if exact_bins is not None:
        records.append(ConvergenceRecord(clock.elapsed(), merged.n_total, linf_error(merged, exact_bins=exact_bins)))
    return merged, records, None


def merton_config(sampler: SamplerKind, lam: float = 10.0, sigma: float = 1.0, jump_mean: float = 0.0,
                  jump_std: float = 1.0, omega=(-8.0, 8.0)) -> JumpDiffusionConfig:
    """Gaussian-jump (Merton) process with known intensity."""
    from .measures import GaussianDensity

    return JumpDiffusionConfig(
        drift=0.0, brownian_vol=sigma, intensity=lam, horizon=1.0,
        jump_density=GaussianDensity(jump_mean, jump_std, 1.0, omega), jump_sampler=sampler,
        lambda_mode="fixed",
    )


def approximate_infinite_activity(density: DensitySpec, eps: float, sigma_eps: float | None = None,
                                  lambda_mode: str = "fixed", sampler: SamplerKind | None = None,
                                  drift: float = 0.0, horizon: float = 1.0,
                                  quad_tol: float = 1e-8) -> JumpDiffusionConfig:
    """Replace jumps smaller than ``eps`` by Brownian motion of volatility ``sigma_eps``.

    ``density`` is an NIG or CGMY Lévy density; it is re-restricted to
    ``|x| >= eps``. When ``sigma_eps`` is omitted it comes from the
    small-|x| law (NIG) or the exact incomplete-gamma form (CGMY). In fixed
    mode the intensity of the remaining jumps is computed by quadrature; in
    adaptive mode it is estimated by the sampler's subdivision.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if isinstance(density, NIGLevyDensity):
        restricted = NIGLevyDensity(density.spec, eps, density.support)
        default_sigma = small_jump_sigma_nig(eps, density.spec)
    elif isinstance(density, CGMYLevyDensity):
        if not asmussen_rosinski_ok(density.spec):
            raise ValueError(f"Y={density.spec.y}: the small-jump Brownian approximation needs 0 < Y <= 1")
        restricted = CGMYLevyDensity(density.spec, eps, density.support)
        default_sigma = small_jump_sigma_cgmy(eps, density.spec)
    else:
        raise TypeError("approximate_infinite_activity supports NIG and CGMY Lévy densities")
    sigma = default_sigma if sigma_eps is None else float(sigma_eps)
    if sampler is None:
        sampler = SamplerKind("aisf")
    intensity = 0.0
    if lambda_mode == "fixed":
        from .specfun import QuadratureSpec

        intensity = truncated_intensity(restricted, QuadratureSpec(-1.0, 1.0, quad_tol, 60))
    return JumpDiffusionConfig(drift=drift, brownian_vol=sigma, intensity=intensity, horizon=horizon,
                               jump_density=restricted, jump_sampler=sampler, lambda_mode=lambda_mode)
