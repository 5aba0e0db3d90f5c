import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levysim.specfun import (QuadratureError, QuadratureSpec, bessel_k1, complex_power,
                             complex_power_array, integrate, lower_incomplete_gamma)

# reference values from scipy.special.k1, frozen
K1_REFERENCE = [
    (1e-3, 999.9962381560855),
    (0.5, 1.6564411200033007),
    (1.0, 0.6019072301972346),
    (math.sqrt(2.0), 0.31419761162989773),
    (2.0, 0.13986588181652246),
    (2.5, 0.07389081634774705),
    (10.0, 1.8648773453825585e-05),
    (50.0, 3.4441022267175555e-23),
]

# reference values from scipy.special.gammainc * gamma, frozen
GAMMA_REFERENCE = [
    (1.5, 0.005, 0.00023499641466986156),
    (1.5, 0.01, 0.0006626809154195449),
    (0.5, 2.0, 1.691806732945198),
    (1.9, 0.3, 0.04401103283759957),
    (2.0, 5.0, 0.9595723180054873),
    (1.05, 40.0, 0.9735042655627757),
]


@pytest.mark.parametrize("x, expected", K1_REFERENCE)
def test_bessel_k1_matches_reference(x, expected):
    assert bessel_k1(x) == pytest.approx(expected, rel=1e-13)


def test_bessel_k1_two_over_pi_at_sqrt2():
    assert 2.0 / math.pi * bessel_k1(math.sqrt(2.0)) == pytest.approx(0.2000244119942633, rel=1e-13)


def test_bessel_k1_small_argument_limit():
    assert bessel_k1(1e-8) * 1e-8 == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("x", [0.0, -1.0, float("nan")])
def test_bessel_k1_rejects_nonpositive(x):
    with pytest.raises(ValueError):
        bessel_k1(x)


def test_bessel_k1_infinite_argument_underflows():
    assert bessel_k1(math.inf) == 0.0


@given(st.floats(0.01, 60.0))
def test_bessel_k1_positive_and_decreasing(x):
    assert bessel_k1(x) > bessel_k1(x * 1.01) > 0.0


@given(st.floats(0.05, 30.0))
def test_x_times_bessel_k1_decreasing(x):
    # (x K1(x))' = -x K0(x) < 0
    assert (x * 1.001) * bessel_k1(x * 1.001) < x * bessel_k1(x)


@pytest.mark.parametrize("s, x, expected", GAMMA_REFERENCE)
def test_lower_incomplete_gamma_matches_reference(s, x, expected):
    assert lower_incomplete_gamma(s, x) == pytest.approx(expected, rel=1e-12)


def test_lower_incomplete_gamma_limits():
    assert lower_incomplete_gamma(1.5, 0.0) == 0.0
    assert lower_incomplete_gamma(1.5, math.inf) == pytest.approx(math.gamma(1.5), rel=1e-15)
    assert lower_incomplete_gamma(1.0, 2.0) == pytest.approx(1.0 - math.exp(-2.0), rel=1e-14)


@pytest.mark.parametrize("s, x", [(0.0, 1.0), (-1.0, 1.0), (1.0, -0.5)])
def test_lower_incomplete_gamma_domain(s, x):
    with pytest.raises(ValueError):
        lower_incomplete_gamma(s, x)


@settings(max_examples=200)
@given(st.floats(0.05, 5.0), st.floats(1e-4, 50.0))
def test_lower_incomplete_gamma_recurrence(s, x):
    # gamma(s + 1, x) = s gamma(s, x) - x^s e^-x
    lhs = lower_incomplete_gamma(s + 1.0, x)
    rhs = s * lower_incomplete_gamma(s, x) - math.exp(s * math.log(x) - x)
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-300)


@given(st.floats(0.1, 4.0), st.floats(1e-3, 30.0))
def test_lower_incomplete_gamma_bounded_and_increasing(s, x):
    g = lower_incomplete_gamma(s, x)
    assert 0.0 < g <= math.gamma(s) * (1 + 1e-14)
    assert lower_incomplete_gamma(s, x * 1.1) >= g


def test_integrate_polynomial_and_trig():
    assert integrate(lambda x: x * x, QuadratureSpec(0.0, 1.0, 1e-13)) == pytest.approx(1 / 3, abs=1e-13)
    assert integrate(math.sin, QuadratureSpec(0.0, math.pi, 1e-12)) == pytest.approx(2.0, abs=1e-11)


def test_integrate_improper_endpoint():
    q = QuadratureSpec(0.0, 1.0, 1e-10, 60, (True, False))
    assert integrate(lambda x: 1.0 / math.sqrt(x), q) == pytest.approx(2.0, abs=1e-5)


def test_integrate_reports_exhaustion():
    with pytest.raises(QuadratureError):
        integrate(lambda x: math.sin(1.0 / x), QuadratureSpec(1e-6, 1.0, 1e-14, 5))


@pytest.mark.parametrize("kwargs", [dict(a=1.0, b=1.0), dict(a=0.0, b=1.0, abs_tol=0.0),
                                    dict(a=0.0, b=1.0, max_refinements=0)])
def test_quadrature_spec_validation(kwargs):
    with pytest.raises(ValueError):
        QuadratureSpec(**kwargs)


def test_complex_power_principal_branch_on_negative_axis():
    # a -0.0 imaginary part must not flip the branch
    assert complex_power(complex(-4.0, -0.0), 0.5) == pytest.approx(2j)
    assert complex_power_array([complex(-4.0, -0.0)], 0.5)[0] == pytest.approx(2j)


def test_complex_power_zero():
    assert complex_power(0j, 0.5) == 0j
    with pytest.raises(ValueError):
        complex_power(0j, -0.5)


@given(st.floats(-50, 50), st.floats(-50, 50), st.floats(0.05, 1.95))
def test_complex_power_array_agrees_with_scalar(re, im, y):
    if re == 0 and im == 0:
        return
    z = complex(re, im)
    assert complex_power_array([z], y)[0] == pytest.approx(complex_power(z, y), rel=1e-12)
