import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from radmax.errors import GridTooCoarse, InvalidInput
from radmax.maximal import (
    RadialIndicatorSet,
    SimpleRadialFunction,
    TabulatedRadial,
    annuli_level_set,
    annuli_maximal,
    average_over,
    dense_grid_max,
    lorentz_n1_norm,
    lorentz_weak_norm,
    uncentered_max,
    uncentered_max_many,
    weak11_empirical_constant,
    weighted_level_set_measure,
)
from radmax.profiles import PiecewisePower, Shifted

UNIT = RadialIndicatorSet.single(0.0, 1.0)
ROOT = PiecewisePower.power(-0.5)


def test_indicator_set_canonical_form():
    E = RadialIndicatorSet(((1.0, 2.0), (0.0, 1.0), (3.0, 4.0)))
    assert E.intervals == ((0.0, 2.0), (3.0, 4.0))
    with pytest.raises(InvalidInput):
        RadialIndicatorSet(((0.0, 2.0), (1.0, 3.0)))
    assert E.contains([0.5, 2.0, 3.5]).tolist() == [True, False, True]
    assert RadialIndicatorSet.single(3.2, 3.8).issubset(E)
    assert E.digest() == RadialIndicatorSet(((0.0, 2.0), (3.0, 4.0))).digest()


def test_simple_function_layers_must_nest():
    with pytest.raises(InvalidInput):
        SimpleRadialFunction([(1.0, UNIT), (1.0, RadialIndicatorSet.single(0.5, 2.0))])
    f = SimpleRadialFunction([(1.0, RadialIndicatorSet.single(0.0, 2.0)), (2.0, UNIT)])
    assert f.sup() == 3.0
    assert float(f.to_profile()(0.5)) == 3.0 and float(f.to_profile()(1.5)) == 1.0


@pytest.mark.parametrize("n", [2, 3, 5])
@pytest.mark.parametrize("r", [1.5, 2.0, 7.0])
def test_unit_ball_indicator_power_law(n, r):
    ev = uncentered_max(UNIT, n, r)
    assert ev.value == pytest.approx(r ** -n, rel=1e-12)
    assert ev.witness == pytest.approx((0.0, r))


def test_unit_ball_indicator_against_dense_grid():
    for n, r in [(2, 2.0), (3, 1.3)]:
        oracle = dense_grid_max(UNIT, n, r, size=2048)
        assert annuli_maximal(UNIT, n, r).value >= oracle * (1 - 1e-12)
        assert annuli_maximal(UNIT, n, r).value == pytest.approx(oracle, rel=1e-3)


def test_constant_function():
    c = PiecewisePower.constant(2.5)
    assert uncentered_max(c, 3, 1.0).value == pytest.approx(2.5)
    assert annuli_maximal(UNIT.to_profile(4.0), 2, 0.5).value == pytest.approx(4.0)


def test_annuli_examples():
    assert annuli_maximal(UNIT, 2, 2.0).value == pytest.approx(0.25)
    shell = RadialIndicatorSet.single(1.0, 2.0)
    got = annuli_maximal(shell, 3, 0.5).value
    assert got == pytest.approx(7.0 / 7.875, rel=1e-12)
    assert got >= dense_grid_max(shell, 3, 0.5, size=2048) * (1 - 1e-12)


@pytest.mark.parametrize("n", [2, 3, 8])
def test_power_weight_ratio_is_scale_free(n):
    # sup of averages of t^-1/2 over intervals containing r, relative to w(r): n/(n - 1/2)
    for r in (0.1, 1.0, 30.0):
        ev = uncentered_max(ROOT, n, r)
        assert ev.value / float(ROOT(r)) == pytest.approx(n / (n - 0.5), rel=1e-6)


def _scipy_grid_max(w, n, r, size=400, b_max=60.0):
    """Best average over a grid of (a, b) from scipy cell integrals and prefix sums."""
    from scipy.integrate import quad

    a_pts = np.linspace(0.0, r, size)
    b_pts = np.geomspace(r, b_max, size)
    pts = np.unique(np.concatenate([a_pts, b_pts]))
    cells = [quad(lambda t: float(w(t)) * t ** (n - 1), lo, hi, epsrel=1e-12)[0]
             for lo, hi in zip(pts[:-1], pts[1:])]
    F = np.concatenate([[0.0], np.cumsum(cells)])
    ia = np.searchsorted(pts, a_pts)
    ib = np.searchsorted(pts, b_pts)
    A, B = np.meshgrid(ia, ib, indexing="ij")
    num = F[B] - F[A]
    den = (pts[B] ** n - pts[A] ** n) / n
    with np.errstate(invalid="ignore", divide="ignore"):
        avg = np.where(den > 0, num / den, -np.inf)
    return float(np.max(avg))


def test_shifted_weight_grid_method_beats_scipy_oracle():
    w = Shifted(ROOT, 2.0)
    for r in (0.3, 2.0, 9.0):
        ev = uncentered_max(w, 3, r)
        assert ev.value >= _scipy_grid_max(w, 3, r) * (1 - 1e-6)


def test_many_radii_match_single_calls():
    f = SimpleRadialFunction([(1.0, RadialIndicatorSet(((0.2, 1.0), (2.0, 3.0))))])
    radii = [0.1, 0.5, 1.5, 2.5, 4.0]
    many = uncentered_max_many(f, 3, radii)
    for r, ev in zip(radii, many):
        assert ev.value == pytest.approx(uncentered_max(f, 3, r).value, rel=1e-12)


def test_average_over_limits():
    assert average_over(UNIT, 2, 0.0, 2.0) == pytest.approx(0.25)
    assert average_over(PiecewisePower.power(-5.0, 1.0), 2, 1.0, math.inf) == 0.0


def test_level_set_matches_brute_force():
    f = SimpleRadialFunction([(1.0, RadialIndicatorSet(((0.5, 1.0), (2.0, 2.5)))),
                              (2.0, RadialIndicatorSet.single(0.6, 0.8))])
    for n in (2, 5):
        for lam in (0.05, 0.3, 1.0, 2.5):
            ivs = annuli_level_set(f, n, lam)
            ivset = [(lo, hi) for lo, hi in ivs]
            for r in np.linspace(0.0, 6.0, 121):
                inside = any(lo <= r <= hi for lo, hi in ivset)
                near = any(min(abs(r - lo), abs(r - hi)) < 1e-6 for lo, hi in ivset)
                if near:
                    continue
                assert inside == (annuli_maximal(f, n, float(r)).value > lam), (n, lam, r)


def test_level_set_of_unit_ball():
    ivs = annuli_level_set(UNIT, 2, 0.25)
    assert len(ivs) == 1
    assert ivs[0][0] == 0.0 and ivs[0][1] == pytest.approx(2.0, rel=1e-12)


def test_weighted_level_set_measure_examples():
    g = TabulatedRadial([0.0, 1.0, 3.0], [2.0, 2.0])
    assert float(weighted_level_set_measure(g, None, 2, 1.0)) == pytest.approx(4.5)
    assert float(weighted_level_set_measure(g, None, 2, 3.0)) == 0.0
    edges = np.concatenate([np.linspace(0.0, 2.0, 401), np.linspace(2.0, 4.0, 401)[1:]])
    tab = TabulatedRadial.from_function(lambda r: annuli_maximal(UNIT, 2, r).value, edges)
    assert float(weighted_level_set_measure(tab, None, 2, 0.25)) == pytest.approx(2.0, rel=1e-12)


def test_coarse_grid_is_reported():
    g = TabulatedRadial([0.0, 1.0, 2.0, 3.0], [4.0, 1.0, 0.5])
    with pytest.raises(GridTooCoarse):
        weighted_level_set_measure(g, None, 2, 2.0)


def test_weak_type_constant_for_unit_ball():
    res = weak11_empirical_constant(None, 2, [SimpleRadialFunction([(1.0, UNIT)])])
    assert res.value == pytest.approx(1.0, rel=1e-9)
    assert res.value <= 2.0
    assert weak11_empirical_constant(ROOT, 3, [SimpleRadialFunction([])]).value == 0.0


def test_weak_type_root_weight_layered_battery():
    fs = [SimpleRadialFunction([(1.0, RadialIndicatorSet.single(0.0, 2.0)), (3.0, UNIT)]),
          SimpleRadialFunction([(1.0, RadialIndicatorSet.single(1.0, 1.5))])]
    res = weak11_empirical_constant(ROOT, 8, fs)
    assert res.value <= 2 * 4 * math.sqrt(2)


def test_lorentz_norms_closed_forms():
    E = RadialIndicatorSet.single(1.0, 2.0)
    g = TabulatedRadial([0.0, 1.0, 2.0], [0.0, 3.0])
    wE = float(E.measure(3, ROOT))
    assert lorentz_weak_norm(g, ROOT, 3, 3) == pytest.approx(3.0 * wE ** (1 / 3), rel=1e-12)
    assert lorentz_weak_norm(TabulatedRadial([0.0, 1.0], [0.0]), None, 2, 2) == 0.0
    # two levels: value 2 on [0,1), 1 on [1,2)
    g2 = TabulatedRadial([0.0, 1.0, 2.0], [2.0, 1.0])
    cands = [2.0 * (0.5) ** 0.5, 1.0 * (2.0) ** 0.5]
    assert lorentz_weak_norm(g2, None, 2, 2) == pytest.approx(max(cands))


def test_lorentz_n1_norm_closed_forms():
    assert lorentz_n1_norm(SimpleRadialFunction([]), ROOT, 4) == 0.0
    f1 = SimpleRadialFunction([(2.0, UNIT)])
    assert lorentz_n1_norm(f1, None, 2) == pytest.approx(2.0 * 0.5 ** 0.5)
    # w = t^-1/2, n = 4: w(E) = (b^3.5 - a^3.5) / 3.5
    m = lambda a, b: (b ** 3.5 - a ** 3.5) / 3.5
    f3 = SimpleRadialFunction([(1.0, RadialIndicatorSet.single(0.0, 3.0)),
                               (2.0, RadialIndicatorSet.single(0.5, 2.0)),
                               (0.5, RadialIndicatorSet.single(1.0, 1.5))])
    ref = m(0, 3) ** 0.25 + 2.0 * m(0.5, 2) ** 0.25 + 0.5 * m(1, 1.5) ** 0.25
    assert lorentz_n1_norm(f3, ROOT, 4) == pytest.approx(ref, rel=1e-12)


interval = st.tuples(st.floats(0.0, 3.0), st.floats(0.05, 2.0))


@given(interval, st.floats(0.01, 5.0), st.floats(0.0, 1.0), st.floats(0.0, 3.0),
       st.sampled_from([2, 3, 6]))
@settings(max_examples=60, deadline=None)
def test_maximal_dominates_every_admissible_average(iv, r, fa, extra, n):
    E = RadialIndicatorSet.single(iv[0], iv[0] + iv[1])
    a = fa * r
    b = r + extra
    if b <= a:
        return
    ev = annuli_maximal(E, n, r)
    assert ev.value >= average_over(E, n, a, b) * (1 - 1e-12)
    assert ev.value <= 1.0 + 1e-12
