import math

import numpy as np
import pytest

from radmax.a1 import (
    ConditionCConstants,
    a1_dimension_sweep,
    a1_lower_bound,
    a1_upper_from_condc,
    condition_c_constants,
    growth_example_curve,
    left_constant_witness,
    shifted_a1_check,
)
from radmax.errors import CertificateMissing, InvalidInput
from radmax.maximal import RadialIndicatorSet
from radmax.profiles import PiecewisePower, Shifted, Tabulated
from radmax.special import lgamma

ROOT = PiecewisePower.power(-0.5)
STEP = PiecewisePower([(0.0, 1.0, 2.0, 0.0), (1.0, math.inf, 1.0, 0.0)])


# condition (c) constants


@pytest.mark.parametrize("alpha", [0.1, 0.5, 0.9])
def test_condc_negative_power(alpha):
    cc = condition_c_constants(PiecewisePower.power(-alpha, 3.0))
    assert cc.beta == pytest.approx(2.0 ** alpha, rel=1e-14)
    assert cc.eta == 1.0


def test_condc_constant():
    cc = condition_c_constants(PiecewisePower.constant(7.0))
    assert (cc.beta, cc.eta) == (1.0, 1.0)


def test_condc_decreasing_step():
    # a decreasing weight never has w0(s) > w0(t) for s >= t, so eta is 1
    cc = condition_c_constants(STEP)
    assert cc.beta == pytest.approx(2.0)
    assert cc.eta == pytest.approx(1.0)
    assert cc.beta_witness == pytest.approx(1.0)


def test_condc_increasing_step_has_eta_two():
    up = PiecewisePower([(0.0, 1.0, 1.0, 0.0), (1.0, math.inf, 2.0, 0.0)])
    cc = condition_c_constants(up)
    assert cc.beta == pytest.approx(2.0)
    assert cc.eta == pytest.approx(2.0)


def test_condc_increasing_power_tail_flags_infinite_eta():
    cc = condition_c_constants(PiecewisePower.power(0.5))
    assert not cc.eta_finite
    assert not cc.finite
    assert a1_upper_from_condc(cc, 10) == math.inf


def test_condc_brute_force_on_tabulated():
    w = Tabulated([0.0, 0.5, 1.5, 4.0], [3.0, 1.0, 2.0, 0.5])
    cc = condition_c_constants(w)
    # dyadic ratio by a fine scan over R
    R = np.geomspace(1e-3, 1e3, 20001)
    beta = max(w.esssup(r, 2 * r) / w.essinf(r, 2 * r) for r in R)
    assert cc.beta >= beta * (1 - 1e-12)
    assert cc.beta == pytest.approx(beta, rel=1e-3)
    # eta: later values against earlier ones
    t = np.linspace(0.01, 6, 600)
    v = w(t)
    eta = max(float(np.max(v[i:]) / v[i]) for i in range(t.size))
    assert cc.eta == pytest.approx(eta)


def test_condc_rejects_shifted_profile():
    with pytest.raises(InvalidInput):
        condition_c_constants(Shifted(ROOT, 1.0))


# certified upper bound


def test_upper_constant_weight_is_four():
    cc = ConditionCConstants(1.0, 1.0)
    assert a1_upper_from_condc(cc, 2) == 4.0
    assert a1_upper_from_condc(cc, 50) == 4.0


def test_upper_root_weight():
    cc = condition_c_constants(ROOT)
    for n in (2, 3, 64):
        assert a1_upper_from_condc(cc, n) == pytest.approx(4 * math.sqrt(2))


def test_upper_domain_boundary():
    assert a1_upper_from_condc(ConditionCConstants(2.0, 1.0), 2.0) == math.inf
    assert a1_upper_from_condc(ConditionCConstants(2.0, 1.0), 2.0 + 1e-9) == 8.0
    assert a1_upper_from_condc(ConditionCConstants(1.0, 1.0), 1.0) == math.inf


def test_upper_switches_on_past_threshold():
    big = PiecewisePower([(0.0, 1.0, 64.0, 0.0), (1.0, math.inf, 1.0, 0.0)])
    cc = condition_c_constants(big)
    assert cc.beta == pytest.approx(64.0)
    assert a1_upper_from_condc(cc, 6) == math.inf
    assert a1_upper_from_condc(cc, 7) == math.inf
    assert a1_upper_from_condc(cc, 8) == pytest.approx(256.0)


# lower bounds


def test_lower_constant_weight_is_one():
    est = a1_lower_bound(PiecewisePower.constant(3.0), 5)
    assert est.lower == pytest.approx(1.0, abs=1e-12)


def test_lower_root_weight_exact_value():
    # sup is attained on balls [0, b], where the ratio is n / (n - 1/2)
    for n in (2, 5):
        est = a1_lower_bound(ROOT, n)
        assert est.lower == pytest.approx(n / (n - 0.5), rel=1e-9)
        assert est.consistent


def test_lower_step_weight_against_closed_form():
    # the ball [0, b] with b > 1 gives (2 + b^n - 1) / b^n over essinf 1,
    # maximal as b -> 1+, i.e. 2
    est = a1_lower_bound(STEP, 3)
    assert est.lower == pytest.approx(2.0, rel=1e-6)
    assert est.lower <= est.upper


def test_lower_rejects_bad_window():
    with pytest.raises(InvalidInput):
        a1_lower_bound(ROOT, 2, window=(1.0, 0.5))


# dimension sweep


def test_sweep_constant_weight():
    sweep = a1_dimension_sweep(PiecewisePower.constant(1.0), [2, 4, 8])
    assert all(e.lower == pytest.approx(1.0, abs=1e-12) for e in sweep.estimates)
    assert sweep.all_ok


def test_sweep_root_weight_bracket():
    sweep = a1_dimension_sweep(ROOT, list(range(2, 65, 6)))
    for e in sweep.estimates:
        assert 1.0 <= e.lower <= 4 * math.sqrt(2)
        assert e.upper == pytest.approx(4 * math.sqrt(2))
    assert sweep.all_ok


def test_sweep_fills_certificate_by_transport():
    big = PiecewisePower([(0.0, 1.0, 64.0, 0.0), (1.0, math.inf, 1.0, 0.0)])
    sweep = a1_dimension_sweep(big, [2, 6, 8, 16])
    ups = [e.upper for e in sweep.estimates]
    assert ups[0] == ups[1] == math.inf
    assert ups[2] == pytest.approx(256.0)
    assert ups[3] == pytest.approx(256.0)
    assert sweep.estimates[3].certificate_kind == "condc"
    assert sweep.all_ok


def test_sweep_rejects_unsorted():
    with pytest.raises(InvalidInput):
        a1_dimension_sweep(ROOT, [4, 2])


def test_sweep_precomputed_must_match():
    est = [a1_lower_bound(ROOT, 2)]
    with pytest.raises(InvalidInput):
        a1_dimension_sweep(ROOT, [3], estimates=est)


# growth example


def test_growth_half_at_dimension_one():
    (row,) = growth_example_curve(0.5, [1])
    assert row.ratio == pytest.approx(2.0, rel=1e-14)
    assert row.floor == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    assert row.holds


def test_growth_large_dimension_ratio_close_to_floor():
    (row,) = growth_example_curve(0.9, [1e6])
    assert 1.0 <= row.ratio_over_floor <= 1.05
    assert row.holds


def test_growth_small_alpha_tends_to_one():
    (row,) = growth_example_curve(1e-8, [3])
    assert row.ratio == pytest.approx(1.0, abs=1e-6)
    assert row.floor == pytest.approx(1.0, abs=1e-6)


def test_growth_margin_matches_mpmath():
    mpmath = pytest.importorskip("mpmath")
    mpmath.mp.dps = 40
    for a, n in [(0.3, 10.0), (0.6, 1e4), (0.9, 1e6)]:
        (row,) = growth_example_curve(a, [n])
        exact = mpmath.log(n * mpmath.beta(1 - a, n)) - (mpmath.loggamma(1 - a) + a * mpmath.log(n))
        assert row.log_margin == pytest.approx(float(exact), rel=1e-9, abs=1e-15)


def test_growth_floor_is_log_gamma():
    rows = growth_example_curve(0.3, [10, 100])
    for r in rows:
        assert r.log_floor == pytest.approx(lgamma(0.7) + 0.3 * math.log(r.n))
    assert rows[0].ratio < rows[1].ratio


def test_growth_rejects_alpha_outside():
    with pytest.raises(InvalidInput):
        growth_example_curve(1.0, [2])


# shifted weights


def test_shifted_zero_shift_reduces_to_a1_bound():
    rows = shifted_a1_check(ROOT, 3, [0.0], np.geomspace(0.1, 10, 5))
    for r in rows:
        assert r.ok
        # the unshifted ratio is the A1 ratio on balls, 3 / 2.5
        assert r.ratio <= 1.2 * (1 + 1e-6)


def test_shifted_constant_weight():
    rows = shifted_a1_check(PiecewisePower.constant(2.0), 4, [0.0, 1.0, 5.0], [0.3, 3.0])
    for r in rows:
        assert r.ratio == pytest.approx(1.0, rel=1e-9)
        assert r.ratio <= 2.0


def test_shifted_root_weight_k3():
    rows = shifted_a1_check(ROOT, 3, [2.0], np.geomspace(0.01, 100, 12))
    worst = max(r.ratio for r in rows)
    assert worst <= 1.5 * 4 * math.sqrt(2)
    assert all(r.ok for r in rows)


def test_shifted_needs_certificate():
    with pytest.raises(CertificateMissing):
        shifted_a1_check(PiecewisePower.power(0.5), 3, [1.0], [1.0])
    with pytest.raises(InvalidInput):
        shifted_a1_check(ROOT, 1, [1.0], [1.0])


# left constant witness


def test_left_constant_constant_profile():
    wit = left_constant_witness(3, [PiecewisePower.constant(2.0)], [0.5, 2.0])
    assert wit.value == pytest.approx(1.0, rel=1e-9)


def test_left_constant_indicator():
    wit = left_constant_witness(2, [RadialIndicatorSet([(0.0, 1.0)])], [2.0])
    # annuli value 1/4, the best centred disc at distance 2 covers about 12.3%
    assert wit.value >= 1.0
    assert wit.rows[0][2] == pytest.approx(0.25)


def test_left_constant_dimension_range():
    with pytest.raises(InvalidInput):
        left_constant_witness(9, [ROOT], [1.0])
