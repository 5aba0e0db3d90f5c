"""The reproduction experiments behind the command-line subcommands.

Each ``run_*`` function takes a validated parameter dict (see
:mod:`levysim.cli` for defaults), writes its CSV artifacts into ``out_dir``
and returns a :class:`Report` whose checks carry the measured value, the
threshold and a pass/fail flag.
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .analysis import (ConvergenceRecord, Histogram, Stopwatch, bin_averages, error_at_time,
                       exact_tail_mass, is_checkpoint, linf_error, sigma_of_mass, tail_mass,
                       write_convergence_csv, write_rows_csv)
from .jumpdiff import approximate_infinite_activity, merton_config, simulate_terminal_batch
from .measures import (CGMYLevyDensity, CGMYSpec, GaussianDensity, NIGLevyDensity,
                       TwoModeDensity, asmussen_rosinski_ok, nig_params_from_ct)
from .oracles import (CfInversionSpec, cf_interval_mass, cgmy_cf, cgmy_pdf, merton_pdf, nig_direct_sample,
                      nig_pdf, write_density_csv)
from .rng import RandomStream
from .samplers import AIMH, AISF, LocalMH, LocalSF, SamplerKind, correlation, mh_width_sweep


@dataclass
class Check:
    label: str
    measured: float
    tolerance: str
    passed: bool

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag}  {self.label}: {self.measured:.6g} ({self.tolerance})"


@dataclass
class Report:
    name: str
    checks: list = field(default_factory=list)
    values: dict = field(default_factory=dict)

    def check(self, label, measured, passed, tolerance):
        self.checks.append(Check(label, float(measured), tolerance, bool(passed)))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def summary(self) -> str:
        return "\n".join(c.line() for c in self.checks)


def _path(out_dir, name):
    os.makedirs(out_dir, exist_ok=True)
    return os.path.join(out_dir, name)


def chi2_z(counts, expected, min_expected=5.0) -> float:
    """Pearson chi-square over bins with enough expected mass, as a z-score ``(X2 - k) / sqrt(2k)``."""
    counts = np.asarray(counts, dtype=np.float64)
    expected = np.asarray(expected, dtype=np.float64)
    keep = expected >= min_expected
    k = int(keep.sum())
    if k < 2:
        raise ValueError("too few bins with enough expected counts")
    x2 = float(np.sum((counts[keep] - expected[keep]) ** 2 / expected[keep]))
    return (x2 - k) / math.sqrt(2.0 * k)


def two_sample_chi2_z(a: Histogram, b: Histogram, min_count=10) -> float:
    """Homogeneity chi-square between two histograms as a z-score."""
    ca, cb = a.counts.astype(np.float64), b.counts.astype(np.float64)
    na, nb = a.n_total, b.n_total
    keep = (ca + cb) >= min_count
    k = int(keep.sum())
    ra, rb = math.sqrt(nb / na), math.sqrt(na / nb)
    x2 = float(np.sum((ra * ca[keep] - rb * cb[keep]) ** 2 / (ca[keep] + cb[keep])))
    return (x2 - k) / math.sqrt(2.0 * k)


# ---------------------------------------------------------------------------
# Fig-1 style width sweep


def run_sweep_width(p, out_dir) -> Report:
    rep = Report("sweep-width")
    dens = GaussianDensity(0.0, 1.0, 1.0, p["omega"])
    rows = mh_width_sweep(dens, p["widths"], p["n_samples"], RandomStream(p["seed"], "sweep"),
                          burn_in=p["burn_in"])
    write_rows_csv(_path(out_dir, "sweep_width.csv"), ["width", "correlation"], rows)
    rep.values["rows"] = rows
    cs = [c for _, c in rows]
    if len(rows) >= 3:
        i = int(np.argmin(cs))
        interior = 0 < i < len(cs) - 1
        c_min = cs[i]
        rep.values["w_min"] = rows[i][0]
        rep.check(f"width-sweep interior minimum (at w={rows[i][0]:g})", c_min,
                  interior and 0.50 <= c_min <= 0.60, "interior, in [0.50, 0.60]")
    return rep


# ---------------------------------------------------------------------------
# Two-mode mixing


HIGH_MODES = ((0.0, 0.25), (0.5, 0.75))


def high_mode_label(x) -> np.ndarray:
    """0 or 1 for the two high-density intervals, -1 in the low-density set."""
    x = np.asarray(x)
    lab = np.full(x.shape, -1, dtype=np.int64)
    for k, (a, b) in enumerate(HIGH_MODES):
        lab[(x >= a) & (x < b)] = k
    return lab


def count_mode_switches(chain) -> int:
    """Moves between the two high modes; low-set visits in between do not count."""
    lab = high_mode_label(chain)
    lab = lab[lab >= 0]
    return int(np.count_nonzero(lab[1:] != lab[:-1]))


def run_two_mode(p, out_dir) -> Report:
    rep = Report("two-mode")
    dens = TwoModeDensity()
    n = p["n_samples"]
    mh = LocalMH(dens, p["width"], RandomStream(p["seed"], "mh"), burn_in=p["burn_in"], start=0.1)
    sf = LocalSF(dens, RandomStream(p["seed"], "sf"), grid_dt=p["grid_dt"], width=p["width"], start=0.1)
    rows = []
    chains = {}
    for name, s in (("local-mh", mh), ("local-sf", sf)):
        chain = s.draw(n)
        chains[name] = chain
        write_rows_csv(_path(out_dir, f"two_mode_{name}_trace.csv"), ["step", "value"],
                       zip(range(n), map(float, chain)))
        occ = float(np.mean(high_mode_label(chain) >= 0))
        sw = count_mode_switches(chain)
        acc = mh.acceptance_rate if s is mh else float("nan")
        rows.append((name, acc, occ, sw))
    write_rows_csv(_path(out_dir, "two_mode_summary.csv"),
                   ["sampler", "acceptance_rate", "high_mode_occupancy", "mode_switches"], rows)
    rep.values["rows"] = rows
    rep.values["chains"] = chains
    acc = rows[0][1]
    rep.check("local MH acceptance, width 1/2", acc, abs(acc - 0.55) <= 0.03, "0.55 +- 0.03")
    for name, _, occ, _ in rows:
        rep.check(f"{name} high-mode occupancy", occ, abs(occ - 0.990) <= 0.005, "0.990 +- 0.005")
    sw_mh, sw_sf = rows[0][3], rows[1][3]
    ratio = sw_sf / sw_mh if sw_mh else math.inf
    rep.check("SF / MH mode-switch ratio", ratio, ratio >= 10.0, ">= 10")
    return rep


# ---------------------------------------------------------------------------
# Gaussian convergence


def truncated_normal_pdf(lo, hi):
    z = 0.5 * (math.erf(hi / math.sqrt(2.0)) - math.erf(lo / math.sqrt(2.0)))
    return lambda x: np.exp(-0.5 * np.asarray(x) ** 2) / math.sqrt(2.0 * math.pi) / z


def sampler_convergence(sampler, n, hist: Histogram, exact_bins, max_chunk=1 << 16):
    """Draw ``n`` values, recording L-inf error at powers of two and at the end.

    Returns ``(records, chain, draw_seconds)``; the chain is kept for the
    correlation estimate and ``draw_seconds`` counts time spent inside the
    sampler only, for variate-rate comparisons.
    """
    chain = np.empty(n)
    records = []
    clock = Stopwatch()
    draw_seconds = 0.0
    done = 0
    while done < n:
        m = min((1 << done.bit_length()) - done, max_chunk, n - done)
        t0 = time.perf_counter()
        chunk = sampler.draw(m)
        draw_seconds += time.perf_counter() - t0
        chain[done:done + m] = chunk
        hist.add_many(chunk)
        done += m
        if is_checkpoint(done) or done == n:
            records.append(ConvergenceRecord(clock.elapsed(), done, linf_error(hist, exact_bins=exact_bins)))
    return records, chain, draw_seconds


def run_gauss_convergence(p, out_dir) -> Report:
    rep = Report("gauss-convergence")
    omega = p["omega"]
    dens = GaussianDensity(0.0, 1.0, 1.0, omega)
    n = p["n_samples"]
    seed = p["seed"]
    edges = np.linspace(omega[0], omega[1], p["bins"] + 1)
    exact_bins = bin_averages(truncated_normal_pdf(*omega), edges)
    samplers = {
        "local-mh": lambda: LocalMH(dens, p["width"], RandomStream(seed, "local-mh"), burn_in=p["burn_in"]),
        "aimh": lambda: AIMH(dens, RandomStream(seed, "aimh"), p["n_cells"], p["rebuild_period"]),
        "local-sf": lambda: LocalSF(dens, RandomStream(seed, "local-sf")),
        "aisf": lambda: AISF(dens, RandomStream(seed, "aisf"), p["n_cells"], p["rebuild_period"]),
    }
    records, corr, rate = {}, {}, {}
    for name, make in samplers.items():
        s = make()
        h = Histogram(omega[0], omega[1], p["bins"])
        rec, chain, draw_seconds = sampler_convergence(s, n, h, exact_bins)
        write_convergence_csv(rec, _path(out_dir, f"gauss_{name}_convergence.csv"))
        _write_subdivision(s, out_dir, f"gauss_{name}")
        records[name] = rec
        corr[name] = correlation(chain)
        rate[name] = n / draw_seconds
    write_rows_csv(_path(out_dir, "gauss_summary.csv"),
                   ["sampler", "correlation", "variates_per_second", "final_linf_error"],
                   [(k, corr[k], rate[k], records[k][-1].linf_error) for k in samplers])
    rep.values.update(records=records, correlation=corr, rate=rate)
    t_eq = min(records["aisf"][-1].wall_seconds, records["local-mh"][-1].wall_seconds)
    e_sf, e_mh = error_at_time(records["aisf"], t_eq), error_at_time(records["local-mh"], t_eq)
    rep.check(f"AISF L-inf at equal wall time {t_eq:.3g}s (local MH: {e_mh:.4g})", e_sf, e_sf < e_mh,
              "< local MH")
    rep.check("AIMH lag-1 correlation", corr["aimh"], corr["aimh"] <= 0.05, "<= 0.05")
    bound = 3.0 / math.sqrt(n)
    rep.check("AISF |lag-1 correlation|", abs(corr["aisf"]), abs(corr["aisf"]) <= bound, f"<= 3/sqrt(N) = {bound:.3g}")
    ratio = rate["aisf"] / rate["local-sf"]
    rep.check("AISF / local SF variate-rate ratio", ratio, ratio >= 1.5, ">= 1.5")
    return rep


# ---------------------------------------------------------------------------
# Jump-diffusion experiments


def _write_subdivision(sampler, out_dir, prefix):
    """Dump the cell table of an adaptive sampler (no-op for other samplers)."""
    sub = getattr(sampler, "sub", None)
    if sub is not None:
        sub.to_csv(_path(out_dir, f"{prefix}_subdivision.csv"))


def _write_hist(h, exact_bins, records, out_dir, prefix):
    h.to_csv(_path(out_dir, f"{prefix}_histogram.csv"), exact_bins)
    write_convergence_csv(records, _path(out_dir, f"{prefix}_convergence.csv"))


def _run_paths(cfg, p, pdf, exact_bins, stream_seed):
    lo, hi = p["range"]
    h = Histogram(lo, hi, p["bins"])
    h, records, proc = simulate_terminal_batch(cfg, p["n_paths"], h, seed=stream_seed, exact_density=pdf,
                                               workers=p["workers"])
    return h, records, getattr(proc, "sampler", None)


def _equal_time_errors(rec_a, rec_b):
    t = min(rec_a[-1].wall_seconds, rec_b[-1].wall_seconds)
    return t, error_at_time(rec_a, t), error_at_time(rec_b, t)


def run_merton(p, out_dir) -> Report:
    rep = Report("merton")
    pdf = lambda x: merton_pdf(x, 1.0, p["lam"], p["sigma"], p["jump_mean"], p["jump_std"])
    lo, hi = p["range"]
    edges = np.linspace(lo, hi, p["bins"] + 1)
    exact_bins = bin_averages(pdf, edges)
    xs = 0.5 * (edges[:-1] + edges[1:])
    write_density_csv(_path(out_dir, "merton_oracle.csv"), xs, pdf(xs))
    kinds = {
        "iid": SamplerKind("iid"),
        "local-mh": SamplerKind("local-mh", width=p["width"]),
        "aimh": SamplerKind("aimh", n_cells=p["n_cells"], rebuild_period=p["rebuild_period"]),
        "aisf": SamplerKind("aisf", n_cells=p["n_cells"], rebuild_period=p["rebuild_period"]),
    }
    thr = p["tail_threshold"]
    oracle_tail = exact_tail_mass(pdf, thr, -p["oracle_extent"], p["oracle_extent"])
    hists, recs, tails = {}, {}, {}
    for name, kind in kinds.items():
        cfg = merton_config(kind, p["lam"], p["sigma"], p["jump_mean"], p["jump_std"], p["omega"])
        h, rec, sampler = _run_paths(cfg, p, pdf, exact_bins, p["seed"])
        _write_hist(h, exact_bins, rec, out_dir, f"merton_{name}")
        _write_subdivision(sampler, out_dir, f"merton_{name}")
        hists[name], recs[name], tails[name] = h, rec, tail_mass(h, thr)
    write_rows_csv(_path(out_dir, "merton_summary.csv"),
                   ["sampler", "final_linf_error", "wall_seconds", "tail_mass", "oracle_tail_mass"],
                   [(k, recs[k][-1].linf_error, recs[k][-1].wall_seconds, tails[k], oracle_tail) for k in kinds])
    rep.values.update(records=recs, tails=tails, oracle_tail=oracle_tail, hists=hists)
    e = recs["aisf"][-1].linf_error
    rep.check(f"AISF L-inf at {p['n_paths']} paths (i.i.d. reference: {recs['iid'][-1].linf_error:.4g})",
              e, e <= 0.004, "<= 0.004")
    f = tails["local-mh"] / oracle_tail
    rep.check(f"local MH tail mass |x|>{thr:g} / oracle", f, f >= 2.0, ">= 2")
    t, e_mh, e_sf = _equal_time_errors(recs["aimh"], recs["aisf"])
    rep.check(f"AIMH L-inf at equal wall time {t:.3g}s (AISF: {e_sf:.4g})", e_mh, e_mh > e_sf, "> AISF")
    z = two_sample_chi2_z(hists["aisf"], hists["iid"])
    rep.check("AISF vs i.i.d. histogram homogeneity z", z, z <= 3.0, "<= 3")
    return rep


def _infinite_activity(p, out_dir, name, density, pdf, sigma_target, oracle_tail, direct=None) -> Report:
    rep = Report(name)
    eps = p["eps"]
    lo, hi = p["range"]
    edges = np.linspace(lo, hi, p["bins"] + 1)
    exact_bins = bin_averages(pdf, edges)
    xs = 0.5 * (edges[:-1] + edges[1:])
    write_density_csv(_path(out_dir, f"{name}_oracle.csv"), xs, pdf(xs))
    thr = p["tail_threshold"]
    hists, recs, tails = {}, {}, {}
    sigma = None
    for sname in ("aimh", "aisf"):
        kind = SamplerKind(sname, n_cells=p["n_cells"], rebuild_period=p["rebuild_period"])
        cfg = approximate_infinite_activity(density, eps, lambda_mode=p["lambda_mode"], sampler=kind)
        sigma = cfg.brownian_vol
        h, rec, sampler = _run_paths(cfg, p, pdf, exact_bins, p["seed"])
        _write_hist(h, exact_bins, rec, out_dir, f"{name}_{sname}")
        _write_subdivision(sampler, out_dir, f"{name}_{sname}")
        hists[sname], recs[sname], tails[sname] = h, rec, tail_mass(h, thr)
    rows = [(k, recs[k][-1].linf_error, recs[k][-1].wall_seconds, tails[k], oracle_tail) for k in recs]
    if direct is not None:
        h = Histogram(lo, hi, p["bins"])
        clock = Stopwatch()
        h.add_many(direct(p["n_paths"]))
        rec = [ConvergenceRecord(clock.elapsed(), p["n_paths"], linf_error(h, exact_bins=exact_bins))]
        _write_hist(h, exact_bins, rec, out_dir, f"{name}_direct")
        hists["direct"], recs["direct"], tails["direct"] = h, rec, tail_mass(h, thr)
        rows.append(("direct", rec[0].linf_error, rec[0].wall_seconds, tails["direct"], oracle_tail))
    write_rows_csv(_path(out_dir, f"{name}_summary.csv"),
                   ["sampler", "final_linf_error", "wall_seconds", "tail_mass", "oracle_tail_mass"], rows)
    rep.values.update(records=recs, tails=tails, oracle_tail=oracle_tail, sigma=sigma, hists=hists,
                      exact_bins=exact_bins)
    rep.check(f"small-jump volatility sigma({eps:g})", sigma, abs(sigma - sigma_target) <= 0.0005,
              f"{sigma_target} +- 0.0005")
    e_sf, e_mh = recs["aisf"][-1].linf_error, recs["aimh"][-1].linf_error
    rep.check(f"AISF L-inf at {p['n_paths']} paths (AIMH: {e_mh:.4g})", e_sf, e_sf < e_mh, "< AIMH")
    s = sigma_of_mass(oracle_tail, p["n_paths"])
    rep.check(f"AIMH tail mass |x|>{thr:g} (oracle {oracle_tail:.4g})", tails["aimh"],
              tails["aimh"] > oracle_tail, "> oracle")
    z = (tails["aisf"] - oracle_tail) / s
    rep.check(f"AISF tail mass |x|>{thr:g} deviation in sigmas", z, abs(z) <= 3.0, "|z| <= 3")
    if direct is not None:
        hd = hists["direct"]
        zd = chi2_z(hd.counts, exact_bins * hd.bin_width * hd.n_total)
        rep.check("direct sampler histogram vs pdf chi-square z", zd, zd <= 3.0, "<= 3")
    return rep


def run_nig(p, out_dir) -> Report:
    spec = nig_params_from_ct(p["sigma"], p["theta"], p["kappa"])
    density = NIGLevyDensity(spec, p["eps"], p["omega"])
    pdf = lambda x: nig_pdf(x, 1.0, spec)
    ext = p["oracle_extent"]
    oracle_tail = exact_tail_mass(pdf, p["tail_threshold"], -ext, ext)
    direct_rng = RandomStream(p["seed"], "direct")
    return _infinite_activity(p, out_dir, "nig", density, pdf, p["sigma_target"], oracle_tail,
                              direct=lambda n: nig_direct_sample(spec, 1.0, direct_rng, n))


def run_cgmy(p, out_dir) -> Report:
    spec = CGMYSpec(p["C"], p["G"], p["M"], p["Y"])
    if not asmussen_rosinski_ok(spec):
        raise ValueError(f"Y={spec.y}: the small-jump Brownian approximation needs 0 < Y <= 1")
    density = CGMYLevyDensity(spec, p["eps"], p["omega"])
    pdf = lambda x: cgmy_pdf(x, 1.0, spec)
    thr = p["tail_threshold"]
    inside = cf_interval_mass(lambda u: cgmy_cf(u, 1.0, spec), -thr, thr, CfInversionSpec())
    return _infinite_activity(p, out_dir, "cgmy", density, pdf, p["sigma_target"], 1.0 - inside)
