"""Acceptance criteria as callable checks, shared by ``levysim selftest`` and the test suite.

``criterion_k(seed, out_dir)`` returns a :class:`~levysim.experiments.Report`.
Criteria 4, 6, 7 and 9 are fast (seconds) and form the default self-test;
the others run full-size reproduction experiments.
"""

from __future__ import annotations

import filecmp
import math
import os
import sys
import tempfile

import numpy as np

from . import experiments
from .analysis import Histogram, bin_averages
from .experiments import Report, chi2_z
from .jumpdiff import merton_config, simulate_terminal_batch
from .measures import (CGMYLevyDensity, CGMYSpec, GaussianDensity, PiecewiseConstantDensity,
                       TwoModeDensity, asmussen_rosinski_ok, eval_cgmy_levy, nig_params_from_ct,
                       small_jump_sigma_cgmy, small_jump_sigma_nig, truncated_intensity)
from .oracles import CfInversionSpec, cf_invert_pdf, cgmy_cf, merton_pdf, nig_cf, nig_direct_sample, nig_pdf
from .rng import RandomStream
from .samplers import AISF, LocalMH, LocalSF, SamplerKind
from .specfun import QuadratureSpec, integrate, lower_incomplete_gamma
from .subdivision import alias_build, alias_draw


def chi2_sf(x2: float, dof: int) -> float:
    """Upper tail probability of the chi-square distribution."""
    return 1.0 - lower_incomplete_gamma(0.5 * dof, 0.5 * x2) / math.gamma(0.5 * dof)


def detailed_balance_z(cells, nu) -> float:
    """Largest standardised violation of ``nu_i P_ij = nu_j P_ji`` over cell pairs.

    ``P_ij`` is estimated from the transitions of the chain of cell indices;
    conditionally on the visits to ``i`` its count is binomial.
    """
    k = len(nu)
    cells = np.asarray(cells)
    trans = np.zeros((k, k), dtype=np.float64)
    np.add.at(trans, (cells[:-1], cells[1:]), 1.0)
    visits = trans.sum(axis=1)
    p = trans / visits[:, None]
    var = p * (1.0 - p) / visits[:, None]
    worst = 0.0
    for i in range(k):
        for j in range(i + 1, k):
            sd = math.sqrt(nu[i] ** 2 * var[i, j] + nu[j] ** 2 * var[j, i])
            if sd > 0:
                worst = max(worst, abs(nu[i] * p[i, j] - nu[j] * p[j, i]) / sd)
    return worst


def _defaults(command, seed, **over):
    from .cli import resolve_config

    raw = {k: str(v) for k, v in over.items()}
    raw["seed"] = str(seed)
    return resolve_config(command, raw)


def _out(out_dir, name):
    return os.path.join(out_dir, name)


def criterion_1(seed=0, out_dir="."):
    return experiments.run_sweep_width(_defaults("sweep-width", seed), _out(out_dir, "sweep-width"))


def criterion_2(seed=0, out_dir="."):
    return experiments.run_two_mode(_defaults("two-mode", seed), _out(out_dir, "two-mode"))


def criterion_3(seed=0, out_dir="."):
    rep = experiments.run_gauss_convergence(_defaults("gauss-convergence", seed),
                                            _out(out_dir, "gauss-convergence"))
    # the equal-time comparison with local MH belongs to the command, not to this criterion
    rep.checks = [c for c in rep.checks if not c.label.startswith("AISF L-inf")]
    return rep


def criterion_4(seed=0, out_dir="."):
    rep = Report("merton-oracle")
    pdf = lambda x: merton_pdf(x, 1.0, 10.0)
    q = lambda f: integrate(f, QuadratureSpec(-80.0, 80.0, 1e-13, 60))
    mass = q(pdf)
    rep.check("integral of the Merton density", mass, abs(mass - 1.0) <= 1e-9, "1 +- 1e-9")
    var = q(lambda x: x * x * pdf(x))
    rep.check("Merton variance by quadrature", var, abs(var - 11.0) <= 1e-6, "11 +- 1e-6")
    xs = np.linspace(-6.0, 6.0, 241)
    worst = 0.0
    for t in (0.25, 1.0, 3.0):
        ref = np.exp(-xs * xs / (2.0 * t)) / np.sqrt(2.0 * math.pi * t)
        worst = max(worst, float(np.max(np.abs(merton_pdf(xs, t, 0.0) - ref) / ref)))
    rep.check("lambda = 0 against N(0, t), max relative difference", worst, worst == 0.0, "== 0")
    return rep


def criterion_5(seed=0, out_dir="."):
    return experiments.run_merton(_defaults("merton", seed), _out(out_dir, "merton"))


def criterion_6(seed=0, out_dir="."):
    rep = Report("nig-constants")
    spec = nig_params_from_ct(1.0, 0.0, 0.5)
    dev = max(abs(spec.alpha - math.sqrt(2.0)), abs(spec.beta), abs(spec.delta - math.sqrt(2.0)))
    rep.check("(sigma, theta, kappa) = (1, 0, 1/2) -> (sqrt2, 0, sqrt2), max deviation", dev, dev <= 1e-15,
              "<= 1e-15")
    s = small_jump_sigma_nig(0.005, spec)
    rep.check("NIG sigma(0.005)", s, abs(s - 0.067) <= 0.0005, "0.067 +- 0.0005")
    xs = np.linspace(-6.0, 6.0, 241)
    inv = cf_invert_pdf(lambda u: nig_cf(u, 1.0, spec), CfInversionSpec(x_grid=xs))
    err = float(np.max(np.abs(inv[:, 1] - nig_pdf(xs, 1.0, spec))))
    rep.check("NIG closed form vs cf inversion, max abs difference", err, err <= 1e-6, "<= 1e-6")
    n = 1_000_000
    h = Histogram(-8.0, 8.0, 100)
    h.add_many(nig_direct_sample(spec, 1.0, RandomStream(seed, "nig-direct"), n))
    expected = bin_averages(lambda x: nig_pdf(x, 1.0, spec), h.edges) * h.bin_width * n
    z = chi2_z(h.counts, expected)
    rep.check("direct NIG sampler histogram vs pdf, chi-square z (1e6 draws)", z, z <= 3.0, "<= 3")
    return rep


def criterion_7(seed=0, out_dir="."):
    rep = Report("cgmy-constants")
    spec = CGMYSpec(1.0, 1.0, 1.0, 0.5)
    s = small_jump_sigma_cgmy(0.005, spec)
    rep.check("CGMY sigma(0.005)", s, abs(s - 0.022) <= 0.0005, "0.022 +- 0.0005")
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(7,)))
    worst = 0.0
    for _ in range(20):
        c, g, m = rng.uniform(0.2, 5.0, 3)
        y = rng.uniform(0.05, 1.0)
        eps = 10 ** rng.uniform(-4, -1)
        sp = CGMYSpec(c, g, m, y)
        closed = small_jump_sigma_cgmy(eps, sp) ** 2
        quad = QuadratureSpec(0.0, eps, 1e-18, 60, (True, False))
        num = (integrate(lambda x: x * x * eval_cgmy_levy(sp, x), quad)
               + integrate(lambda x: x * x * eval_cgmy_levy(sp, -x), quad))
        worst = max(worst, abs(closed - num) / closed)
    rep.check("closed-form sigma^2 vs quadrature, 20 random parameter sets, max relative", worst,
              worst <= 1e-9, "<= 1e-9")
    rejected = not asmussen_rosinski_ok(CGMYSpec(1.0, 1.0, 1.0, 1.5))
    from .cli import EXIT_CONFIG, main

    code = main(["cgmy", "--config", _write_tmp("Y = 1.5\n"), "--out", os.path.join(out_dir, "cgmy-rejected")])
    rep.check("Y = 1.5 rejected (validity check and CLI exit status)", code,
              rejected and code == EXIT_CONFIG, f"exit {EXIT_CONFIG}")
    xs = np.linspace(-40.0, 40.0, 4001)
    pdf = cf_invert_pdf(lambda u: cgmy_cf(u, 1.0, spec), CfInversionSpec(x_grid=xs))[:, 1]
    mass = float(np.trapezoid(pdf, xs))
    rep.check("cf-inverted CGMY pdf integrates to", mass, abs(mass - 1.0) <= 1e-6, "1 +- 1e-6")
    return rep


def _write_tmp(text):
    fd, path = tempfile.mkstemp(suffix=".cfg")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    return path


def criterion_8(seed=0, out_dir="."):
    rep = Report("nig-cgmy-end-to-end")
    for name, run in (("nig", experiments.run_nig), ("cgmy", experiments.run_cgmy)):
        sub = run(_defaults(name, seed), _out(out_dir, name))
        for c in sub.checks:
            if c.label.startswith(("AISF L-inf", "AIMH tail", "AISF tail")):
                c.label = f"{name.upper()} {c.label}"
                rep.checks.append(c)
    return rep


def criterion_9(seed=0, out_dir="."):
    rep = Report("properties")
    root = RandomStream(seed, "properties")

    # alias table: chi-square goodness of fit
    w = root.child("alias-w").generator.uniform(0.01, 1.0, 12)
    table = alias_build(w)
    n = 1_000_000
    draws = alias_draw(table, root.child("alias").kernel_stream(), n)
    counts = np.bincount(draws, minlength=w.size)
    exp = n * w / w.sum()
    p = chi2_sf(float(np.sum((counts - exp) ** 2 / exp)), w.size - 1)
    rep.check("alias table chi-square p-value (12 cells, 1e6 draws)", p, p >= 0.001, ">= 0.001")

    # step function: no consecutive repeats once the grid spacing reaches sup nu
    dens = GaussianDensity(0.0, 1.0, 1.0, (-5.0, 5.0))
    sf = LocalSF(dens, root.child("sf"), grid_dt=dens.evaluate(0.0))
    x = sf.draw(1_000_000)
    repeats = int(np.count_nonzero(x[1:] == x[:-1]))
    rep.check("SF consecutive repeats at grid spacing = sup nu (1e6 draws)", repeats, repeats == 0, "== 0")

    # discrete detailed balance of local MH between cells of a piecewise-constant density; the
    # proposal reaches non-adjacent cells, so pair fluxes are not forced equal by the 1-D topology
    nu = [1.0, 3.0, 2.0, 0.5, 1.5]
    pc = PiecewiseConstantDensity(nu, (0.0, 5.0))
    mh = LocalMH(pc, 6.0, root.child("mh"), start=2.5)
    cells = np.minimum(mh.draw(10_000_000).astype(np.int64), 4)
    worst = detailed_balance_z(cells, nu)
    rep.check("MH detailed balance nu_i P_ij = nu_j P_ji, max deviation in sigmas (1e7 steps)", worst,
              worst <= 3.0, "<= 3")

    # histogram merge associativity
    g = root.child("hist").generator
    parts = [g.normal(size=m) * 3 for m in (1000, 2500, 4000)]
    hs = []
    for v in parts:
        h = Histogram(-5.0, 5.0, 40)
        h.add_many(v)
        hs.append(h)
    left, right = (hs[0] + hs[1]) + hs[2], hs[0] + (hs[1] + hs[2])
    whole = Histogram(-5.0, 5.0, 40)
    whole.add_many(np.concatenate(parts))
    same = all(np.array_equal(a.counts, whole.counts) and a.n_total == whole.n_total
               and a.n_underflow == whole.n_underflow and a.n_overflow == whole.n_overflow
               for a in (left, right))
    rep.check("histogram merge associativity and equality with a single pass", int(same), same, "== 1")

    # single-worker bit determinism of the CSV artifacts
    cfg = merton_config(SamplerKind("aisf"))
    files = []
    for k in range(2):
        h = Histogram(-10.0, 10.0, 100)
        h, rec, _ = simulate_terminal_batch(cfg, 5000, h, seed=seed)
        path = os.path.join(out_dir, f"determinism_{k}.csv")
        os.makedirs(out_dir, exist_ok=True)
        h.to_csv(path)
        files.append(path)
    identical = filecmp.cmp(files[0], files[1], shallow=False)
    rep.check("two single-worker runs give byte-identical histogram CSVs", int(identical), identical, "== 1")

    # adaptive intensity estimates against quadrature
    cases = [
        ("Gaussian, scale 10", GaussianDensity(0.0, 1.0, 10.0, (-8.0, 8.0)), 200),
        ("two-mode", TwoModeDensity(), 4),
        ("CGMY (1, 1, 1, 0.5), eps 0.005", CGMYLevyDensity(CGMYSpec(1.0, 1.0, 1.0, 0.5), 0.005), None),
    ]
    for label, d, n_cells in cases:
        s = AISF(d, root.child(label), n_cells)
        s.draw(1_000_000)
        s.sub.adapt()
        est = s.lambda_estimate()
        ref = truncated_intensity(d, QuadratureSpec(-1.0, 1.0, 1e-9, 60))
        rel = abs(est - ref) / ref
        rep.check(f"lambda estimate vs quadrature, {label}", rel, rel <= 0.01, "relative <= 0.01")
    return rep


CRITERIA = {
    1: ("width-sweep minimum", criterion_1),
    2: ("two-mode acceptance and mixing", criterion_2),
    3: ("Gaussian correlations and rates", criterion_3),
    4: ("Merton oracle consistency", criterion_4),
    5: ("Merton simulation", criterion_5),
    6: ("NIG constants and oracle triangle", criterion_6),
    7: ("CGMY constants", criterion_7),
    8: ("NIG/CGMY end-to-end", criterion_8),
    9: ("property suites", criterion_9),
}

FAST = (4, 6, 7, 9)


def run_selftest(seed=0, out_dir="levysim-out", full=False, stream=sys.stdout) -> bool:
    """Run the fast criteria (or all with ``full``), print PASS/FAIL lines, return overall success."""
    ok = True
    for k in (CRITERIA if full else FAST):
        title, fn = CRITERIA[k]
        rep = fn(seed, os.path.join(out_dir, f"criterion_{k}"))
        for c in rep.checks:
            print(f"[{k}] {c.line()}", file=stream)
        tag = "PASS" if rep.passed else "FAIL"
        print(f"{tag}  criterion {k}: {title}", file=stream)
        ok &= rep.passed
    return ok
