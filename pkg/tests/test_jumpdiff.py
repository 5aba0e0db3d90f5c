import math

import numpy as np
import pytest

from levysim.analysis import Histogram, bin_averages, linf_error
from levysim.experiments import two_sample_chi2_z
from levysim.jumpdiff import (JumpDiffusionConfig, JumpDiffusionProcess, approximate_infinite_activity,
                              draw_jump_times, merton_config, simulate_terminal, simulate_terminal_batch)
from levysim.measures import CGMYLevyDensity, CGMYSpec, GaussianDensity, NIGLevyDensity, NIGSpec
from levysim.oracles import merton_pdf
from levysim.rng import RandomStream
from levysim.samplers import SamplerKind

NIG = NIGSpec(math.sqrt(2), 0.0, math.sqrt(2))
CGMY = CGMYSpec(1.0, 1.0, 1.0, 0.5)
MERTON_PDF = lambda x: merton_pdf(x, 1.0, 10.0)  # noqa: E731


@pytest.mark.parametrize("kwargs", [
    dict(horizon=0.0),
    dict(brownian_vol=-1.0),
    dict(intensity=-1.0),
    dict(lambda_mode="sometimes"),
    dict(intensity=1.0),
    dict(intensity=1.0, jump_density=GaussianDensity(), jump_sampler=None),
    dict(lambda_mode="adaptive", jump_density=GaussianDensity(), jump_sampler=SamplerKind("local-sf")),
])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        JumpDiffusionConfig(**kwargs)


def test_draw_jump_times():
    g = RandomStream(1).generator
    counts = []
    for _ in range(4000):
        t = draw_jump_times(3.0, 2.0, g)
        assert np.all(np.diff(t) >= 0) and np.all((t >= 0) & (t <= 2.0))
        counts.append(t.size)
    # Poisson(6): mean and variance both 6
    assert np.mean(counts) == pytest.approx(6.0, abs=0.15)
    assert np.var(counts) == pytest.approx(6.0, abs=0.5)
    with pytest.raises(ValueError):
        draw_jump_times(0.0, 1.0, g)


def test_single_path_parts_add_up():
    p = simulate_terminal(merton_config(SamplerKind("aisf")), seed=3)
    assert p.n_jumps == p.jump_times.size
    assert p.terminal == pytest.approx(p.drift_part + p.brownian_part + p.jump_part, abs=1e-12)
    assert p.jump_part == pytest.approx(p.jump_values.sum(), abs=1e-12)


def test_brownian_stream_independent_of_jump_sampler():
    a = simulate_terminal(merton_config(SamplerKind("iid")), seed=4)
    b = simulate_terminal(merton_config(SamplerKind("aisf")), seed=4)
    assert a.brownian_part == b.brownian_part


def test_no_jumps_is_drifted_brownian_motion():
    cfg = JumpDiffusionConfig(drift=0.5, brownian_vol=2.0, horizon=4.0)
    x = JumpDiffusionProcess(cfg, 5).simulate_terminals(200_000)
    assert x.mean() == pytest.approx(2.0, abs=0.03)
    assert x.var() == pytest.approx(16.0, rel=0.02)


def test_merton_iid_variance():
    x = JumpDiffusionProcess(merton_config(SamplerKind("iid")), 6).simulate_terminals(100_000)
    assert x.var() == pytest.approx(11.0, abs=0.2)


def test_merton_iid_linf_at_1e5_paths():
    h, rec, _ = simulate_terminal_batch(merton_config(SamplerKind("iid")), 100_000, Histogram(-10, 10, 100),
                                        seed=0, exact_density=MERTON_PDF)
    assert rec[-1].linf_error <= 0.004


def test_merton_aisf_matches_iid_reference():
    hs = []
    for kind in ("iid", "aisf"):
        h, _, _ = simulate_terminal_batch(merton_config(SamplerKind(kind)), 100_000, Histogram(-10, 10, 100),
                                          seed=7)
        hs.append(h)
    assert two_sample_chi2_z(*hs) <= 3.0


def test_merton_local_mh_heavy_tails():
    from levysim.analysis import exact_tail_mass, tail_mass

    h, _, _ = simulate_terminal_batch(merton_config(SamplerKind("local-mh", width=4.0)), 100_000,
                                      Histogram(-10, 10, 100), seed=8)
    assert tail_mass(h, 8.0) >= 2.0 * exact_tail_mass(MERTON_PDF, 8.0, -40, 40)


def test_batch_records_at_powers_of_two_and_end():
    h, rec, _ = simulate_terminal_batch(merton_config(SamplerKind("iid")), 5000, Histogram(-10, 10, 100),
                                        seed=9, exact_density=MERTON_PDF)
    assert [r.n_samples for r in rec] == [2 ** k for k in range(13)] + [5000]
    assert h.n_total == 5000
    assert all(b.wall_seconds >= a.wall_seconds for a, b in zip(rec, rec[1:]))
    assert rec[-1].linf_error == linf_error(h, exact_bins=bin_averages(MERTON_PDF, h.edges))


def test_batch_is_deterministic_and_seed_sensitive():
    def run(seed):
        h, _, _ = simulate_terminal_batch(merton_config(SamplerKind("aimh")), 3000, Histogram(-10, 10, 50),
                                          seed=seed)
        return h.counts

    assert np.array_equal(run(10), run(10))
    assert not np.array_equal(run(10), run(11))


def test_multi_worker_merge():
    h, rec, proc = simulate_terminal_batch(merton_config(SamplerKind("aisf")), 3001, Histogram(-10, 10, 50),
                                           seed=12, exact_density=MERTON_PDF, workers=2)
    assert proc is None
    assert h.n_total == 3001
    assert len(rec) == 1 and rec[0].n_samples == 3001


def test_nig_approximation_constants():
    cfg = approximate_infinite_activity(NIGLevyDensity(NIG, 0.005), 0.005)
    assert cfg.brownian_vol == pytest.approx(0.067, abs=5e-4)
    # scipy.integrate.quad reference for the intensity beyond eps on [-25, 25]
    assert cfg.intensity == pytest.approx(178.09282821991906, rel=1e-7)
    assert cfg.jump_density.excluded_origin_radius == 0.005
    assert cfg.jump_sampler.name == "aisf"


def test_cgmy_approximation_constants():
    cfg = approximate_infinite_activity(CGMYLevyDensity(CGMY, 0.01), 0.005)
    assert cfg.brownian_vol == pytest.approx(0.022, abs=5e-4)
    assert cfg.intensity == pytest.approx(49.76133433700772, rel=1e-7)
    assert cfg.jump_density.excluded_origin_radius == 0.005


def test_approximation_rejects_invalid_inputs():
    with pytest.raises(ValueError):
        approximate_infinite_activity(CGMYLevyDensity(CGMYSpec(1.0, 1.0, 1.0, 1.5), 0.005), 0.005)
    with pytest.raises(TypeError):
        approximate_infinite_activity(GaussianDensity(), 0.005)
    with pytest.raises(ValueError):
        approximate_infinite_activity(NIGLevyDensity(NIG, 0.005), 0.0)


def test_adaptive_intensity_tracks_quadrature():
    cfg = approximate_infinite_activity(CGMYLevyDensity(CGMY, 0.005), 0.005, lambda_mode="adaptive")
    assert cfg.intensity == 0.0
    proc = JumpDiffusionProcess(cfg, 13, warmup=200_000)
    assert proc.intensity == pytest.approx(49.76133433700772, rel=0.01)
    proc.simulate_terminals(2000)
    assert proc.intensity == pytest.approx(49.76133433700772, rel=0.01)


def test_nig_end_to_end_small():
    from levysim.oracles import nig_pdf

    cfg = approximate_infinite_activity(NIGLevyDensity(NIG, 0.005), 0.005)
    h, rec, _ = simulate_terminal_batch(cfg, 4000, Histogram(-8, 8, 40), seed=14,
                                        exact_density=lambda x: nig_pdf(x, 1.0, NIG))
    # binomial standard deviation at the peak bin is about 0.017 here
    assert rec[-1].linf_error < 0.06
