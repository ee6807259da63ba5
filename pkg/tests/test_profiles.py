import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from radmax.errors import DivergentMoment, InvalidInput
from radmax.profiles import (
    PiecewisePower,
    Shifted,
    Tabulated,
    beta_moment,
    multiply,
    profile_essinf,
    profile_esssup,
    profile_from_config,
    vn_measure,
    weighted_moment,
)
from radmax.rng import COUNTER_EXPONENTS, random_profile, trial_rng

ROOT = PiecewisePower.power(-0.5)
STEP = PiecewisePower([(0.0, 1.0, 2.0, 0.0), (1.0, math.inf, 1.0, 0.0)])


def test_vn_measure_small_cases():
    assert float(vn_measure(0, 1, 5)) == pytest.approx(0.2)
    assert float(vn_measure(1, 2, 1)) == pytest.approx(1.0)


def test_vn_measure_huge_dimension():
    # (1 - 0.5^1000) / 1000; the correction is far below double precision
    assert vn_measure(0.5, 1, 1000).log == pytest.approx(-math.log(1000), abs=1e-12)


def test_vn_measure_against_mpmath_thin_shell():
    a, b, n = 1.0, 1.0 + 1e-9, 50.0
    ref = mpmath.log((mpmath.mpf(b) ** n - mpmath.mpf(a) ** n) / n)
    assert vn_measure(a, b, n).log == pytest.approx(float(ref), rel=1e-9)


def test_weighted_moment_examples():
    assert float(weighted_moment(PiecewisePower.constant(1.0), 0, 1, 7)) == pytest.approx(1 / 7)
    assert float(weighted_moment(ROOT, 0, 1, 2)) == pytest.approx(2 / 3)
    closed = (4 ** 99.5 - 1) / 99.5
    got = weighted_moment(ROOT, 1, 4, 100)
    assert got.log == pytest.approx(math.log(closed), rel=1e-12)
    quad_v = weighted_moment(ROOT, 1, 4, 100, method="quadrature", rtol=1e-12)
    assert abs(math.expm1(quad_v.log - got.log)) < 1e-10


def test_weighted_moment_infinite_interval():
    w = PiecewisePower.power(-5.0)
    # int_1^inf t^-5 t^2 dt = 1/2
    assert float(weighted_moment(w, 1.0, math.inf, 3)) == pytest.approx(0.5)


def test_divergent_moments_raise():
    with pytest.raises(DivergentMoment):
        weighted_moment(PiecewisePower.power(-3.0), 0.0, 1.0, 2)
    with pytest.raises(DivergentMoment):
        weighted_moment(PiecewisePower.constant(1.0), 1.0, math.inf, 2)


def test_beta_moment_examples():
    assert float(beta_moment(0.5, 1)) == pytest.approx(2.0)
    assert float(beta_moment(0.0, 9)) == pytest.approx(1 / 9)
    ref = 6 * math.sqrt(math.pi) / math.gamma(4.5)
    assert float(beta_moment(0.5, 4)) == pytest.approx(ref, rel=1e-12)
    num = quad(lambda t: (1 - t) ** -0.5 * t ** 3, 0, 1)[0]
    assert float(beta_moment(0.5, 4)) == pytest.approx(num, rel=1e-9)


def test_ess_bounds():
    assert profile_essinf(ROOT, 1, 4) == pytest.approx(0.5)
    assert profile_esssup(ROOT, 1, 4) == pytest.approx(1.0)
    c = PiecewisePower.constant(3.0)
    assert profile_essinf(c, 0, 9) == profile_esssup(c, 0, 9) == 3.0
    assert profile_essinf(STEP, 0.5, 2) == 1.0
    assert profile_esssup(STEP, 0.5, 2) == 2.0


def test_tabulated_moment_closed_form():
    w = Tabulated([0.0, 1.0, 2.0], [1.0, 3.0, 0.5])
    # int_0^3 w t dt = 1/2 + 3 * 3/2 + 0.5 * 5/2
    assert float(weighted_moment(w, 0.0, 3.0, 2)) == pytest.approx(0.5 + 4.5 + 1.25)


def test_shifted_moment_against_scipy():
    w = Shifted(ROOT, 2.0)
    ref = quad(lambda t: (4 + t * t) ** -0.25 * t ** 2, 0.5, 3.0)[0]
    assert float(weighted_moment(w, 0.5, 3.0, 3)) == pytest.approx(ref, rel=1e-9)
    with pytest.raises(InvalidInput):
        weighted_moment(w, 0.5, 3.0, 3, method="closed")


def test_shifted_is_base_at_zero_shift():
    w = Shifted(ROOT, 0.0)
    assert w(np.array([0.25, 4.0])) == pytest.approx([2.0, 0.5])


def test_product_profile():
    p = multiply(STEP, ROOT)
    assert float(p(0.25)) == pytest.approx(4.0)
    assert float(p(4.0)) == pytest.approx(0.5)


def test_profile_config_round_trip():
    cfg = {"kind": "piecewise_power",
           "pieces": [{"lo": 0, "hi": 1, "coeff": 2, "exponent": 0},
                      {"lo": 1, "hi": "inf", "coeff": 1, "exponent": -0.5}]}
    w = profile_from_config(cfg)
    assert float(w(0.5)) == 2.0 and float(w(4.0)) == 0.5
    again = profile_from_config(w.to_config())
    assert float(again(9.0)) == pytest.approx(1 / 3)
    sh = profile_from_config({"kind": "shifted", "rho": 1.0, "base": cfg})
    assert float(sh(0.0)) == pytest.approx(1.0)
    with pytest.raises(InvalidInput):
        profile_from_config({"kind": "nope"})
    with pytest.raises(InvalidInput):
        profile_from_config({"kind": "piecewise_power", "pieces": [{"lo": 0}]})


def test_invalid_profiles_rejected():
    with pytest.raises(InvalidInput):
        PiecewisePower([(0.0, 1.0, -1.0, 0.0), (1.0, math.inf, 1.0, 0.0)])
    with pytest.raises(InvalidInput):
        Tabulated([1.0, 0.5], [1.0, 1.0])


@pytest.mark.parametrize("i", range(25))
def test_random_closed_moments_match_quadrature(i):
    rng = trial_rng(7, i)
    w = random_profile(rng, exponents=COUNTER_EXPONENTS)
    n = float(rng.integers(2, 30))
    a = float(rng.uniform(0.0, 5.0))
    b = a + float(rng.uniform(0.01, 10.0))
    c = weighted_moment(w, a, b, n, method="closed")
    q = weighted_moment(w, a, b, n, method="quadrature", rtol=1e-12)
    assert abs(math.expm1(q.log - c.log)) < 1e-9


@given(st.floats(0.0, 3.0), st.floats(0.01, 3.0), st.floats(0.01, 3.0), st.integers(2, 20))
@settings(max_examples=60, deadline=None)
def test_moment_additivity(a, d1, d2, n):
    w = STEP
    whole = weighted_moment(w, a, a + d1 + d2, n)
    parts = weighted_moment(w, a, a + d1, n) + weighted_moment(w, a + d1, a + d1 + d2, n)
    assert abs(math.expm1(whole.log - parts.log)) < 1e-12
