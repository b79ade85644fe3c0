import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import volest as v


def _const_spec(theta=1.0, a=1.0, s1=1.0, s2=2.0):
    vol = v.VolatilityModel.bachelier(0.0, 1.0, y0=1.0)
    return v.ModelSpec(
        theta=theta, a=v.CoefFn.constant(a), sigma1=v.CoefFn.constant(s1),
        sigma2=v.CoefFn.constant(s2), vol=vol, x0=1.0,
    )


def test_f_g_eval_hand_values():
    vol = v.VolatilityModel.bachelier(0.0, 1.0, y0=1.0)
    spec = v.linear_spec(2.0, v.CoefFn.constant(0.5), vol)
    f, g = v.f_g_eval(spec, 0.0, 2.0, 7.0)  # sigma2 constant: y irrelevant
    assert f == pytest.approx(2.0)  # x/(x^2 * 0.25) = 1/(x*0.25)
    assert g == pytest.approx(2.0)  # x/(x*0.5)
    # g^2 = f*a identically
    assert g * g == pytest.approx(f * 2.0)


def test_f_g_eval_degenerate():
    vol = v.VolatilityModel.bachelier(0.0, 1.0, y0=1.0)
    spec = v.linear_spec(2.0, v.CoefFn.constant(0.5), vol)
    with pytest.raises(v.DegenerateVolatilityError):
        v.f_g_eval(spec, 0.0, 0.0, 1.0)


@given(
    x=st.floats(0.25, 4.0),
    s2val=st.floats(0.25, 4.0),
    a0=st.floats(-3.0, 3.0),
)
def test_g_squared_equals_f_times_a(x, s2val, a0):
    vol = v.VolatilityModel.bachelier(0.0, 1.0, y0=1.0)
    spec = v.ModelSpec(
        theta=1.0, a=v.CoefFn.constant(a0), sigma1=v.CoefFn.sqrt_abs(1.0),
        sigma2=v.CoefFn.constant(s2val), vol=vol, x0=1.0,
    )
    f, g = v.f_g_eval(spec, 0.0, x, 0.0)
    assert g * g == pytest.approx(f * a0, rel=1e-12, abs=1e-12)


def test_estimate_theta_hand_computed():
    # h = 0.5, x: 1 -> 2 -> 1.5, constant coefficients a=1, s1=1, s2=2:
    # f_k = 1/4, num = 1/4*(1) + 1/4*(-1/2) = 1/8
    # g_k = 1/2, den = (1/4 + 1/4)*1/2 = 1/4, so theta_hat = 1/2
    spec = _const_spec()
    grid = v.TimeGrid(1.0, 0.5)
    path = v.PathPair(grid, np.array([1.0, 2.0, 1.5]), np.ones(3))
    res = v.estimate_theta(spec, path)
    assert res.theta_hat == pytest.approx(0.5, rel=1e-15)
    assert res.numerator == pytest.approx(0.125, rel=1e-15)
    assert res.denominator == pytest.approx(0.25, rel=1e-15)
    assert res.T == 1.0
    assert res.n_used == 2


def test_estimate_result_csv_row():
    spec = _const_spec()
    grid = v.TimeGrid(1.0, 0.5)
    path = v.PathPair(grid, np.array([1.0, 2.0, 1.5]), np.ones(3))
    res = v.estimate_theta(spec, path)
    cells = res.csv_row().split(",")
    assert len(cells) == len(v.ESTIMATE_CSV_HEADER.split(","))
    assert float(cells[0]) == 1.0
    assert float(cells[1]) == res.theta_hat
    assert int(cells[4]) == 2


def test_estimate_theta_degenerate_volatility_names_node():
    vol = v.VolatilityModel.bachelier(0.0, 1.0, y0=1.0)
    spec = v.linear_spec(1.0, v.CoefFn.constant(1.0), vol)
    grid = v.TimeGrid(1.5, 0.5)
    path = v.PathPair(grid, np.array([1.0, 0.0, 1.0, 2.0]), np.ones(4))
    with pytest.raises(v.DegenerateVolatilityError) as exc_info:
        v.estimate_theta(spec, path)
    assert exc_info.value.node == 1


def test_estimate_theta_underflow_is_degenerate():
    vol = v.VolatilityModel.bachelier(0.0, 1.0, y0=1.0)
    spec = v.linear_spec(1.0, v.CoefFn.constant(1.0), vol)
    grid = v.TimeGrid(1.0, 0.5)
    # sigma1(x) = x ~ 1e-200 is nonzero but squares to zero
    path = v.PathPair(grid, np.array([1e-200, 2e-200, 1e-200]), np.ones(3))
    with pytest.raises(v.DegenerateVolatilityError) as exc_info:
        v.estimate_theta(spec, path)
    assert "underflow" in str(exc_info.value)


def test_no_information_when_drift_coefficient_vanishes():
    vol = v.VolatilityModel.bachelier(0.0, 1.0, y0=1.0)
    spec = v.ModelSpec(
        theta=1.0, a=v.CoefFn.constant(0.0), sigma1=v.CoefFn.constant(1.0),
        sigma2=v.CoefFn.constant(1.0), vol=vol, x0=0.0,
    )
    grid = v.TimeGrid(1.0, 0.5)
    path = v.PathPair(grid, np.array([0.0, 1.0, 0.5]), np.ones(3))
    with pytest.raises(v.NoInformationError):
        v.estimate_theta(spec, path)


def test_estimator_is_invariant_under_sigma2_rescaling(sim):
    base = v.table1_spec("row1")
    scaled = v.ModelSpec(
        theta=base.theta, a=base.a, sigma1=base.sigma1,
        sigma2=v.CoefFn.power(3.0, 0.25), vol=base.vol, x0=base.x0,
    )
    for idx in range(10):
        path = sim(base, 2.0, 0.01, seed=11, idx=idx)
        t1 = v.estimate_theta(base, path).theta_hat
        t2 = v.estimate_theta(scaled, path).theta_hat
        assert t2 == pytest.approx(t1, rel=1e-12)


def test_linear_estimator_matches_general(sim):
    specs = [v.table1_spec(cid) for cid in ("row2", "row3", "row6", "row7")]
    rng_idx = 0
    for spec in specs:
        assert spec.linear_flag
        for idx in range(12):
            path = sim(spec, 2.0, 0.01, seed=21, idx=rng_idx)
            rng_idx += 1
            general = v.estimate_theta(spec, path)
            linear = v.estimate_theta_linear(spec.sigma2, path)
            assert linear.theta_hat == pytest.approx(general.theta_hat, rel=1e-12)
            assert linear.denominator > 0.0


def test_linear_estimator_rejects_zero_state():
    grid = v.TimeGrid(1.0, 0.5)
    path = v.PathPair(grid, np.array([1.0, 0.0, 1.0]), np.ones(3))
    with pytest.raises(v.DegenerateVolatilityError):
        v.estimate_theta_linear(v.CoefFn.constant(1.0), path)


def test_estimator_single_path_sanity(sim):
    spec = v.table1_spec("row3")
    path = sim(spec, 10.0, 0.01, seed=2)
    res = v.estimate_theta(spec, path)
    assert abs(res.theta_hat - 2.0) < 0.5
    assert res.denominator > 0.0
    assert res.n_used == 1000


def test_martingale_identity_unit_case(sim):
    spec = v.table1_spec("row6")
    path = sim(spec, 2.0, 0.01, seed=13)
    res = v.estimate_theta(spec, path)
    ratio = v.martingale_ratio(spec, path)
    lhs = res.theta_hat - spec.theta
    assert abs(lhs - ratio) <= 1e-13 * max(1.0, abs(lhs), abs(ratio))


def test_martingale_ratio_refuses_observed_data(unit_spec):
    grid = v.TimeGrid(1.0, 0.5)
    path = v.PathPair(grid, np.array([0.0, 1.0, 0.5]), np.ones(3))  # dw=None
    with pytest.raises(v.UnsupportedDataError):
        v.martingale_ratio(unit_spec, path)


def test_unit_model_estimator_equals_brownian_average(sim, unit_spec):
    # a = sigma1 = sigma2 = 1: theta_hat - theta = W_T/T by construction
    path = sim(unit_spec, 4.0, 0.01, seed=17)
    res = v.estimate_theta(unit_spec, path)
    w_T = float(np.sum(path.dw))
    assert res.theta_hat - 2.0 == pytest.approx(w_T / 4.0, rel=1e-11, abs=1e-13)
