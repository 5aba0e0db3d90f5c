import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levysim.acceptance import chi2_sf
from levysim.measures import GaussianDensity, PiecewiseConstantDensity, TwoModeDensity
from levysim.rng import RandomStream
from levysim.samplers import AISF
from levysim.subdivision import (WEIGHT_FLOOR, Subdivision, alias_build, alias_draw, build,
                                 default_cell_count)


def test_build_two_mode_initial_weights():
    sub = build((0.0, 1.0), 0.0, 4, TwoModeDensity())
    assert np.allclose(sub.weight, [0.25, 0.0025, 0.25, 0.0025], rtol=1e-15)
    assert np.allclose(sub.sup_estimate, [1.0, 0.01, 1.0, 0.01])
    assert np.all(sub.clock == 0.0)


def test_single_cell_always_drawn(backend):
    sub = build((0.0, 1.0), 0.0, 1, TwoModeDensity(), backend=backend)
    draws = alias_draw(sub.alias, RandomStream(3).kernel_stream(backend), 1000)
    assert np.all(draws == 0)


def test_adaptation_converges_to_cell_masses():
    dens = TwoModeDensity()
    sub = build((0.0, 1.0), 0.0, 4, dens)
    g = RandomStream(5).generator
    for i in range(4):
        for x in g.uniform(sub.lo[i], sub.hi[i], 25_000):
            sub.record_sample(i, dens.evaluate(float(x)))
    sub.adapt()
    assert np.allclose(sub.weight, [0.25, 0.0025, 0.25, 0.0025], rtol=0.02)
    assert sub.samples_since_rebuild == 0
    assert sub.lambda_estimate() == pytest.approx(0.505, rel=0.01)


def test_adapt_keeps_unvisited_weights_and_floors_zero_cells():
    dens = PiecewiseConstantDensity([1.0, 2.0, 3.0], (0.0, 3.0))
    sub = build((0.0, 3.0), 0.0, 3, dens)
    sub.record_sample(0, 0.0)
    sub.adapt()
    assert sub.weight[0] == WEIGHT_FLOOR
    assert sub.weight[1] == 2.0 and sub.weight[2] == 3.0
    assert np.all(np.isfinite(sub.alias.prob))


def test_lambda_estimate_requires_visits():
    sub = build((0.0, 1.0), 0.0, 4, TwoModeDensity())
    with pytest.raises(ValueError):
        sub.lambda_estimate()


def test_record_sample_rejects_bad_values():
    sub = build((0.0, 1.0), 0.0, 4, TwoModeDensity())
    for v in (-1.0, math.nan, math.inf):
        with pytest.raises(ValueError):
            sub.record_sample(0, v)


@pytest.mark.parametrize("omega, eps, n", [((1.0, 0.0), 0.0, 4), ((-1.0, 1.0), 1.0, 4), ((-1.0, 1.0), 0.1, 1),
                                           ((0.0, 1.0), 0.0, 0)])
def test_build_errors(omega, eps, n):
    with pytest.raises(ValueError):
        build(omega, eps, n, GaussianDensity(support=(-1.0, 1.0)))


def test_default_cell_count_per_side():
    assert default_cell_count((-8.0, 8.0), 0.0) == 256
    assert default_cell_count((-25.0, 25.0), 0.005) == 512
    assert default_cell_count((0.0, 1.0), 0.005) == 256


@settings(max_examples=100, deadline=None)
@given(lo=st.floats(-30.0, -0.5), hi=st.floats(0.5, 30.0), eps=st.floats(0.0, 0.4), n=st.integers(2, 300))
def test_cells_partition_domain_minus_origin(lo, hi, eps, n):
    sub = build((lo, hi), eps, n, GaussianDensity(0.0, 5.0, 1.0, (lo, hi)))
    assert sub.n_cells == n
    assert np.all(sub.lo < sub.hi)
    assert sub.lo[0] == lo and sub.hi[-1] == hi
    gaps = sub.lo[1:] - sub.hi[:-1]
    if eps > 0:
        # exactly one gap, which is the excluded interval
        assert np.count_nonzero(gaps) == 1
        k = int(np.flatnonzero(gaps)[0])
        assert sub.hi[k] == -eps and sub.lo[k + 1] == eps
    else:
        assert np.all(gaps == 0.0)
    total = float(np.sum(sub.hi - sub.lo))
    assert total == pytest.approx((hi - lo) - 2 * eps, rel=1e-12)


def test_cell_index_half_open():
    sub = build((0.0, 1.0), 0.0, 4, TwoModeDensity())
    assert sub.cell_index(0.0) == 0
    assert sub.cell_index(0.25) == 1
    assert sub.cell_index(1.0) == 3
    assert sub.cell_index(1.5) == -1
    sub2 = build((-1.0, 1.0), 0.1, 4, GaussianDensity(support=(-1.0, 1.0)))
    assert sub2.cell_index(0.0) == -1


@pytest.mark.parametrize("seed", [0, 1])
def test_alias_chi_square(backend, seed):
    w = RandomStream(seed, "w").generator.uniform(0.0, 1.0, 20)
    w[3] = 0.0
    table = alias_build(w, backend)
    n = 200_000
    counts = np.bincount(alias_draw(table, RandomStream(seed).kernel_stream(backend), n), minlength=20)
    assert counts[3] == 0
    keep = w > 0
    exp = n * w[keep] / w.sum()
    x2 = float(np.sum((counts[keep] - exp) ** 2 / exp))
    assert chi2_sf(x2, int(keep.sum()) - 1) > 1e-3


@given(st.lists(st.floats(0.0, 1e6), min_size=1, max_size=50).filter(lambda w: sum(w) > 0))
def test_alias_table_reproduces_weights_exactly(w):
    # the implied probability of cell i is (prob_i + sum of (1 - prob_j) over j aliasing to i) / n
    t = alias_build(np.array(w))
    n = len(w)
    implied = np.array(t.prob, dtype=float)
    for j in range(n):
        if t.prob[j] < 1.0:
            implied[t.alias[j]] += 1.0 - t.prob[j]
    assert np.allclose(implied / n, np.array(w) / sum(w), atol=1e-12)


def test_lambda_estimate_gaussian_200_cells():
    dens = GaussianDensity(0.0, 1.0, 10.0, (-8.0, 8.0))
    s = AISF(dens, RandomStream(11), n_cells=200)
    s.draw(1_000_000)
    s.sub.adapt()
    assert s.lambda_estimate() == pytest.approx(10.0, abs=0.1)


def test_lambda_estimate_refinement_invariance():
    dens = GaussianDensity(0.0, 1.0, 10.0, (-8.0, 8.0))
    est = []
    for n_cells in (50, 400):
        s = AISF(dens, RandomStream(12, str(n_cells)), n_cells=n_cells)
        s.draw(500_000)
        s.sub.adapt()
        est.append(s.lambda_estimate())
    assert est[0] == pytest.approx(est[1], rel=0.01)


def test_merge_combines_accumulators():
    dens = TwoModeDensity()
    a = build((0.0, 1.0), 0.0, 4, dens)
    b = build((0.0, 1.0), 0.0, 4, dens)
    a.record_sample(0, 1.0)
    b.record_sample(0, 0.5)
    b.record_sample(1, 0.01)
    m = a.merge(b)
    assert list(m.count) == [2, 1, 0, 0]
    assert m.weight[0] == pytest.approx(0.75 * 0.25)
    with pytest.raises(ValueError):
        a.merge(build((0.0, 1.0), 0.0, 2, dens))


def test_subdivision_csv(tmp_path):
    sub = build((0.0, 1.0), 0.0, 4, TwoModeDensity())
    p = tmp_path / "cells.csv"
    sub.to_csv(p)
    rows = list(csv.reader(open(p)))
    assert rows[0] == ["cell_lo", "cell_hi", "weight", "sup_estimate", "count"]
    assert len(rows) == 5
    assert float(rows[2][0]) == 0.25


def test_subdivision_rejects_overlap():
    with pytest.raises(ValueError):
        Subdivision([0.0, 0.5], [0.6, 1.0], [1, 1], [1, 1])
