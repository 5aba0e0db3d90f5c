import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levysim.analysis import (ConvergenceRecord, Histogram, bin_averages, error_at_time, exact_tail_mass, fmt,
                              is_checkpoint, linf_error, sigma_of_mass, statistical_band, tail_mass,
                              write_convergence_csv, write_rows_csv)

values = st.lists(st.floats(-12, 12, allow_nan=False), max_size=60)


def _filled(xs, lo=-10.0, hi=10.0, n=20):
    h = Histogram(lo, hi, n)
    h.add_many(np.asarray(xs, dtype=float))
    return h


def test_half_open_bins():
    h = _filled([-1.0, 0.0, 0.5, 0.9999999999, 1.0, 3.0, -3.0], lo=-3.0, hi=3.0, n=6)
    assert h.counts.tolist() == [1, 0, 1, 3, 1, 0]
    assert (h.n_underflow, h.n_overflow, h.n_total) == (0, 1, 7)


def test_edges_are_exact_under_rounding():
    h = Histogram(-1.0, 1.0, 10)
    h.add_many(h.edges[:-1])
    assert h.counts.tolist() == [1] * 10


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        Histogram(1.0, 1.0, 3)
    with pytest.raises(ValueError):
        Histogram(0.0, 1.0, 0)
    with pytest.raises(ValueError):
        Histogram(0.0, 1.0, 2).add(float("nan"))
    with pytest.raises(ValueError):
        Histogram(0.0, 1.0, 2).merge(Histogram(0.0, 1.0, 3))
    with pytest.raises(ValueError):
        Histogram(0.0, 1.0, 2).density()


@given(values, values, values)
@settings(max_examples=100, deadline=None)
def test_merge_is_associative_and_commutative(a, b, c):
    ha, hb, hc = _filled(a), _filled(b), _filled(c)
    left = (ha + hb) + hc
    right = ha + (hb + hc)
    direct = _filled(a + b + c)
    for h in (right, hc + hb + ha, direct):
        assert np.array_equal(left.counts, h.counts)
        assert (left.n_total, left.n_underflow, left.n_overflow) == (h.n_total, h.n_underflow, h.n_overflow)


@given(values.filter(bool))
@settings(max_examples=100, deadline=None)
def test_density_integrates_to_in_range_fraction(xs):
    h = _filled(xs)
    inside = h.n_total - h.n_underflow - h.n_overflow
    assert h.density().sum() * h.bin_width == pytest.approx(inside / h.n_total, abs=1e-12)
    assert h.counts.sum() == inside


def test_bin_averages_exact_for_polynomials():
    edges = np.linspace(-2.0, 3.0, 11)
    got = bin_averages(lambda x: x ** 3, edges)
    a, b = edges[:-1], edges[1:]
    exact = (b ** 4 - a ** 4) / 4.0 / (b - a)
    assert np.allclose(got, exact, rtol=0, atol=1e-13)


def test_linf_error():
    h = _filled([0.25, 0.75], lo=0.0, hi=1.0, n=2)
    assert linf_error(h, exact_density=lambda x: np.ones_like(x)) == 0.0
    assert linf_error(h, exact_bins=np.array([1.5, 1.0])) == 0.5
    with pytest.raises(ValueError):
        linf_error(h)


def test_tail_mass_partial_bins_and_overflow():
    h = _filled([-9.5, -5.0, 0.0, 4.5, 50.0], lo=-10.0, hi=10.0, n=10)
    # threshold 5 falls inside [4, 6): half of the 4.5 bin counts, -5.0 sits in [-6, -4) likewise half
    assert tail_mass(h, 5.0) == pytest.approx((1 + 0.5 + 0.5 + 1) / 5)
    with pytest.raises(ValueError):
        tail_mass(h, 10.0)


def test_exact_tail_mass_gaussian():
    pdf = lambda x: np.exp(-x * x / 2) / math.sqrt(2 * math.pi)  # noqa: E731
    assert exact_tail_mass(pdf, 2.0, -40, 40) == pytest.approx(math.erfc(2.0 / math.sqrt(2)), rel=1e-12)


def test_checkpoints_and_error_at_time():
    assert [n for n in range(1, 70) if is_checkpoint(n)] == [1, 2, 4, 8, 16, 32, 64]
    assert not is_checkpoint(0)
    recs = [ConvergenceRecord(0.1, 1, 0.5), ConvergenceRecord(0.2, 2, 0.4), ConvergenceRecord(0.4, 4, 0.3)]
    assert error_at_time(recs, 0.3) == 0.4
    assert error_at_time(recs, 0.4) == 0.3
    with pytest.raises(ValueError):
        error_at_time(recs, 0.05)


def test_band_and_sigma():
    assert sigma_of_mass(0.5, 100) == 0.05
    band = statistical_band(np.array([0.5]), 100, 1.0)
    assert band[0] == pytest.approx(0.05)


def test_fmt_round_trips():
    for x in (0.1, 1.0 / 3.0, 1e-300, 123456789.123456789, -2.5e17):
        assert float(fmt(x)) == x
    assert fmt(0.1) == "0.10000000000000001"


def test_csv_formats(tmp_path):
    h = _filled([0.25, 0.75, 0.8], lo=0.0, hi=1.0, n=2)
    h.to_csv(tmp_path / "h.csv", exact_bins=np.array([1.0, 1.0]))
    rows = list(csv.reader(open(tmp_path / "h.csv")))
    assert rows[0] == ["bin_center", "empirical_density", "exact_density"]
    assert rows[1] == ["0.25", "0.66666666666666663", "1"]

    write_convergence_csv([ConvergenceRecord(0.5, 8, 0.1)], tmp_path / "c.csv")
    rows = list(csv.reader(open(tmp_path / "c.csv")))
    assert rows == [["wall_seconds", "n_samples", "linf_error"], ["0.5", "8", "0.10000000000000001"]]

    write_rows_csv(tmp_path / "r.csv", ["width", "correlation"], [(7.0, 1.0 / 3.0)])
    rows = list(csv.reader(open(tmp_path / "r.csv")))
    assert rows[1] == ["7", "0.33333333333333331"]
