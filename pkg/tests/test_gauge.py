import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from frostman_kit.errors import DegenerateGaugeError, DiniViolationError, ResolutionError
from frostman_kit.gauge import (
    GaugeFunction, check_d_falling, check_regular, dini_transform, premeasure_estimate,
    premeasure_profile,
)
from frostman_kit.geometry import PointCloud
from frostman_kit.measures import cantor_cloud

LOG23 = math.log(2) / math.log(3)
GRID = 2.0 ** -np.arange(2, 41)


# ---- regularity ----------------------------------------------------------

def test_regular_linear():
    res = check_regular(GaugeFunction.power(1.0), 2.0, GRID)
    assert res.is_regular
    assert res.ratio_bounds[0] == pytest.approx(2.0, rel=1e-12)
    assert res.ratio_bounds[1] == pytest.approx(2.0, rel=1e-12)


def test_regular_sqrt():
    ok, (lo, hi) = check_regular(GaugeFunction.power(0.5), 2.0, GRID)
    assert ok and lo == pytest.approx(math.sqrt(2)) and hi == pytest.approx(math.sqrt(2))


def test_regular_t_log():
    g = GaugeFunction.log_power(1.0, 1.0)
    res = check_regular(g, 2.0, GRID)
    assert res.is_regular
    # oracle: direct evaluation of 2x log(1/2x) / (x log(1/x)) on the grid
    oracle = [2 * x * math.log(1 / (2 * x)) / (x * math.log(1 / x)) if 2 * x <= math.exp(-1)
              else float(g(2 * x)) / (x * math.log(1 / x)) for x in GRID]
    assert res.ratio_bounds[0] == pytest.approx(min(oracle), rel=1e-9)
    assert res.ratio_bounds[1] == pytest.approx(max(oracle), rel=1e-9)
    assert 1.0 <= res.ratio_bounds[0] and res.ratio_bounds[1] <= 2 * (1 + math.log(2))


def test_regular_degenerate():
    # t^50 underflows to exactly 0 at t = 1e-10, a grid point away from 0
    with pytest.raises(DegenerateGaugeError):
        check_regular(GaugeFunction.power(50.0), 2.0, [1e-10, 0.1, 0.5])


# ---- Dini transform ------------------------------------------------------

def test_dini_sqrt():
    h = dini_transform(GaugeFunction.power(0.5))
    assert float(h(1.0)) == pytest.approx(2.0, abs=1e-6)
    assert float(h(0.0)) == 0.0


def test_dini_linear():
    h = dini_transform(GaugeFunction.power(1.0))
    assert float(h(0.7)) == pytest.approx(0.7, abs=1e-9)


def test_dini_violation():
    with pytest.raises(DiniViolationError):
        dini_transform(lambda t: 1.0 / math.log(1.0 / t), x_max=0.5)


def test_dini_against_quadrature_t_log():
    g = GaugeFunction.log_power(1.0, 1.0)
    h = dini_transform(g, x_max=math.exp(-1))
    for x in [1e-5, 1e-3, 0.1, 0.3]:
        # closed form of the integral of log(1/t) from 0 to x
        assert float(h(x)) == pytest.approx(x * math.log(1 / x) + x, rel=1e-6)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 1.0))
def test_dini_power_closed_form(beta):
    h = dini_transform(GaugeFunction.power(beta))
    xs = np.geomspace(1e-6, 1.0, 25)
    exact = xs ** beta / beta
    assert np.max(np.abs(h(xs) / exact - 1)) <= 1e-6


@pytest.mark.parametrize("g", [
    GaugeFunction.power(0.3), GaugeFunction.power(0.5), GaugeFunction.power(1.0),
    GaugeFunction.log_power(1.0, 1.0), GaugeFunction.log_power(0.5, 1.0),
])
def test_dini_dominates_source(g):
    # only gauges whose local exponent stays at most 1; t^b with b > 1 has h = g/b < g
    h = dini_transform(g, x_max=min(1.0, g.t_max))
    assert np.all(np.diff(h.values) >= 0)
    assert h.min_ratio_to_source() >= 1 - 1e-9


# ---- d-falling -----------------------------------------------------------

def test_d_falling_power_closed_form():
    for d, alpha in [(1, 0.5), (1, 1.0), (2, 1.5), (2, 2.0), (3, 2.5)]:
        res = check_d_falling(GaugeFunction.power(alpha), d, GRID)
        assert res.is_d_falling
        lo, hi = res.comparability
        assert lo == pytest.approx(1 / (alpha - d + 1), rel=1e-6)
        assert hi == pytest.approx(1 / (alpha - d + 1), rel=1e-6)


def test_d_falling_boundary_rejected():
    res = check_d_falling(GaugeFunction.power(1.0), 2, GRID)
    assert not res.is_d_falling and res.reason


def test_d_falling_log_power():
    f = GaugeFunction.log_power(1.5, 1.0)
    res = check_d_falling(f, 2, GRID[GRID <= math.exp(-1)])
    assert res.is_d_falling
    lo, hi = res.comparability
    # quadrature oracle at one grid point
    x = 2.0 ** -10
    integral = integrate.quad(lambda t: t ** -0.5 * math.log(1 / t), 0, x)[0]
    ratio = x * integral / float(f(x))
    assert lo - 1e-9 <= ratio <= hi + 1e-9
    assert 0 < lo <= hi < math.inf


@pytest.mark.parametrize("d", [2, 3])
def test_d_falling_sign_agreement(d):
    for alpha in [d - 1 - 0.1, d - 1 + 0.1, d - 0.5, d]:
        res = check_d_falling(GaugeFunction.power(alpha), d, GRID)
        assert res.is_d_falling == (alpha > d - 1)


# ---- premeasure ----------------------------------------------------------

def test_premeasure_single_point():
    val, fam = premeasure_estimate(PointCloud(1, [[0.5]]), 1.0, 0.1)
    assert val <= 2e-12 and len(fam) == 1


def test_premeasure_unit_interval():
    cloud = PointCloud(1, np.linspace(0, 1, 1001)[:, None], 5e-4)
    val, _ = premeasure_estimate(cloud, 1.0, 0.1)
    assert 1.0 <= val <= 1.2


def test_premeasure_cantor():
    val, fam = premeasure_estimate(cantor_cloud(7), LOG23, 3.0 ** -4)
    assert 1.0 <= val <= 3 ** LOG23
    assert np.all(2 * fam.radii <= 3.0 ** -4 * (1 + 1e-9))


def test_premeasure_resolution_error():
    with pytest.raises(ResolutionError):
        premeasure_estimate(cantor_cloud(5), LOG23, cantor_cloud(5).resolution)


def test_premeasure_monotone_in_delta():
    deltas = [0.01, 0.02, 0.05, 0.1, 0.2]
    vals = [v for _, v in premeasure_profile(cantor_cloud(6), LOG23, deltas, seed=2)]
    assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))


def test_gauge_monotone_and_zero_at_origin():
    for g in [GaugeFunction.power(0.7), GaugeFunction.log_power(1.0, 2.0),
              GaugeFunction.table([1e-3, 0.1, 1.0], [1e-4, 0.05, 1.0])]:
        ts = np.geomspace(1e-8, min(g.t_max, 1.0), 200)
        vals = g(ts)
        assert np.all(np.diff(vals) >= 0)
        assert float(g(1e-12)) < 1e-3


def test_log_power_tiny_arguments_stay_finite():
    g = GaugeFunction.log_power(1.0, 1.0)
    tiny = np.array([5e-324, 1e-310, 1e-300])
    vals = g(tiny)
    assert np.all(np.isfinite(vals)) and np.all(vals >= 0)
