import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import volest as v


# ---------------------------------------------------------------------------
# noise streams

def test_noise_stream_is_deterministic():
    a = v.NoiseStream(123, 4).normals(64)
    b = v.NoiseStream(123, 4).normals(64)
    np.testing.assert_array_equal(a, b)
    c = v.NoiseStream(123, 5).normals(64)
    assert not np.array_equal(a, c)
    d = v.NoiseStream(124, 4).normals(64)
    assert not np.array_equal(a, d)


def test_noise_stream_prefix_exact():
    full = v.NoiseStream(9, 0).normals(1000)
    np.testing.assert_array_equal(v.NoiseStream(9, 0).normals(10), full[:10])


def test_noise_stream_rejects_non_integers():
    with pytest.raises(v.DomainError):
        v.NoiseStream(1.5, 0)
    with pytest.raises(v.DomainError):
        v.NoiseStream(1, "x")
    with pytest.raises(v.DomainError):
        v.NoiseStream(1, 0).normals(-1)


def test_noise_stream_accepts_negative_and_huge_seeds():
    # masked to 64 bits, so these must work and stay deterministic
    a = v.NoiseStream(-1, 2**70 + 3).normals(8)
    b = v.NoiseStream(2**64 - 1, 3).normals(8)
    np.testing.assert_array_equal(a, b)


def test_noise_moments_large_sample():
    z = v.NoiseStream(2024, 0).normals(1_000_000)
    assert abs(float(z.mean())) <= 4e-3
    assert abs(float(z.var()) - 1.0) <= 1e-2
    # symmetric tails: skewness near zero
    assert abs(float((z**3).mean())) <= 1.5e-2


@given(
    seed=st.integers(min_value=-(2**63), max_value=2**64 - 1),
    idx=st.integers(min_value=0, max_value=2**32),
    n1=st.integers(0, 64),
    n2=st.integers(64, 256),
)
@settings(max_examples=25, deadline=None)
def test_noise_prefix_property(seed, idx, n1, n2):
    np.testing.assert_array_equal(
        v.NoiseStream(seed, idx).normals(n1),
        v.NoiseStream(seed, idx).normals(n2)[:n1],
    )


def test_wiener_increments_scale_with_step():
    grid = v.TimeGrid(100.0, 0.25)
    dw = v.wiener_increments(grid, v.NoiseStream(7, 0))
    assert dw.shape == (400,)
    assert float(dw.var()) == pytest.approx(0.25, rel=0.25)


def test_correlate_hand_value():
    dw1 = np.array([0.5])
    dw3 = np.array([-0.25])
    out = v.correlate(dw1, dw3, 0.6)
    assert out[0] == pytest.approx(0.6 * 0.5 + 0.8 * (-0.25))
    assert out[0] == pytest.approx(0.1)


def test_correlate_edge_cases():
    dw1 = np.array([1.0, 2.0])
    dw3 = np.array([3.0, 4.0])
    np.testing.assert_array_equal(v.correlate(dw1, dw3, 1.0), dw1)
    np.testing.assert_array_equal(v.correlate(dw1, dw3, 0.0), dw3)
    with pytest.raises(v.DomainError):
        v.correlate(dw1, np.array([1.0]), 0.5)
    with pytest.raises(v.DomainError):
        v.correlate(dw1, dw3, 1.0001)


def test_correlated_increments_have_target_correlation(sim):
    vol = v.VolatilityModel.bachelier(0.0, 1.0, y0=0.0)
    spec = v.ModelSpec(
        theta=0.0, a=v.CoefFn.constant(0.0), sigma1=v.CoefFn.constant(1.0),
        sigma2=v.CoefFn.constant(1.0), vol=vol, x0=0.0, rho=0.8,
    )
    # with these coefficients x accumulates dw and y accumulates dw2
    path = sim(spec, 100.0, 0.01, seed=5)
    dx = np.diff(path.x)
    dy = np.diff(path.y)
    r = float(np.corrcoef(dx, dy)[0, 1])
    assert r == pytest.approx(0.8, abs=0.02)


# ---------------------------------------------------------------------------
# path containers

def test_path_pair_validates_shapes():
    grid = v.TimeGrid(1.0, 0.5)
    ok = v.PathPair(grid, np.zeros(3), np.zeros(3), np.zeros(2))
    assert ok.dw is not None
    with pytest.raises(v.DomainError):
        v.PathPair(grid, np.zeros(4), np.zeros(3))
    with pytest.raises(v.DomainError):
        v.PathPair(grid, np.zeros(3), np.zeros(3), np.zeros(3))


def test_path_pair_arrays_read_only():
    grid = v.TimeGrid(1.0, 0.5)
    path = v.PathPair(grid, np.zeros(3), np.zeros(3), np.zeros(2))
    with pytest.raises(ValueError):
        path.x[0] = 1.0
    with pytest.raises(ValueError):
        path.dw[0] = 1.0


def test_path_prefix_is_a_view(sim, unit_spec):
    path = sim(unit_spec, 4.0, 0.5)
    pre = path.prefix(2.0)
    assert pre.grid.n == 4
    assert np.shares_memory(pre.x, path.x)
    np.testing.assert_array_equal(pre.x, path.x[:5])
    np.testing.assert_array_equal(pre.dw, path.dw[:4])


# ---------------------------------------------------------------------------
# Euler integration

def test_noiseless_linear_growth_exact():
    vol = v.VolatilityModel.bachelier(0.0, 1.0, y0=1.0)
    spec = v.linear_spec(2.0, v.CoefFn.constant(1.0), vol, x0=1.0)
    grid = v.TimeGrid(1.0, 0.25)
    zeros = np.zeros(4)
    path = v.euler_pair(spec, grid, zeros, zeros)
    # x multiplies by (1 + theta*h) = 1.5 each step
    np.testing.assert_allclose(path.x, [1.0, 1.5, 2.25, 3.375, 5.0625], rtol=0)
    np.testing.assert_array_equal(path.y, np.ones(5))


def test_noiseless_estimator_recovers_theta_exactly():
    vol = v.VolatilityModel.bachelier(0.0, 1.0, y0=1.0)
    spec = v.linear_spec(2.0, v.CoefFn.constant(1.0), vol, x0=1.0)
    grid = v.TimeGrid(1.0, 0.25)
    zeros = np.zeros(4)
    path = v.euler_pair(spec, grid, zeros, zeros)
    res = v.estimate_theta(spec, path)
    assert res.theta_hat == pytest.approx(2.0, rel=1e-12)


def test_left_point_discretization_sees_unadvanced_y():
    # one step by hand: x1 = x0 + theta*a(x0)*h + sigma1(x0)*sigma2(y0)*dw
    vol = v.VolatilityModel.bachelier(3.0, 1.0, y0=2.0)  # y moves up fast
    spec = v.ModelSpec(
        theta=1.5, a=v.CoefFn.constant(1.0), sigma1=v.CoefFn.constant(2.0),
        sigma2=v.CoefFn.linear(1.0, 0.0), vol=vol, x0=1.0,
    )
    grid = v.TimeGrid(0.5, 0.5)
    dw1 = np.array([0.25])
    dw2 = np.array([-0.125])
    path = v.euler_pair(spec, grid, dw1, dw2)
    assert path.x[1] == pytest.approx(1.0 + 1.5 * 1.0 * 0.5 + 2.0 * 2.0 * 0.25)
    assert path.y[1] == pytest.approx(2.0 + 3.0 * 0.5 + 1.0 * (-0.125))


def test_euler_pair_validates_increment_lengths(unit_spec):
    grid = v.TimeGrid(1.0, 0.5)
    with pytest.raises(v.DomainError):
        v.euler_pair(unit_spec, grid, np.zeros(3), np.zeros(2))


def test_ou_mean_reversion():
    vol = v.VolatilityModel.vasicek(1.0, 0.0, 0.5, y0=1.0)  # dY = -Y dt + 0.5 dW1
    spec = v.ModelSpec(
        theta=0.0, a=v.CoefFn.constant(0.0), sigma1=v.CoefFn.constant(1.0),
        sigma2=v.CoefFn.constant(1.0), vol=vol, x0=0.0,
    )
    grid = v.TimeGrid(5.0, 0.01)
    finals = [
        v.simulate_pair(spec, grid, v.NoiseStream(77, i)).y[-1] for i in range(2000)
    ]
    sample_mean = float(np.mean(finals))
    se = float(np.std(finals, ddof=1)) / math.sqrt(len(finals))
    assert abs(sample_mean - math.exp(-5.0)) <= 3.2 * se + 5e-4  # small h bias allowance
    # stationary variance gamma^2/2 = 0.125
    assert float(np.var(finals, ddof=1)) == pytest.approx(0.125, rel=0.15)


def test_positive_domain_paths_stay_positive():
    for vol in (
        v.VolatilityModel.gbm(1.0, 2.0, y0=1.0),
        v.VolatilityModel.cir(1.0, 2.0, 1.0, y0=1.0),
    ):
        spec = v.linear_spec(2.0, v.CoefFn.sqrt_y(1.0), vol)
        grid = v.TimeGrid(5.0, 0.01)
        for idx in range(200):
            path = v.simulate_pair(spec, grid, v.NoiseStream(31, idx))
            assert float(path.y.min()) > 0.0
            assert path.clamp_count >= 0


def test_clamp_counter_activates_when_y_would_cross_zero():
    # strong noise relative to the Feller margin: crossings guaranteed
    vol = v.VolatilityModel.cir(1.0, 0.5, 1.0, y0=0.01)
    spec = v.linear_spec(1.0, v.CoefFn.sqrt_y(1.0), vol)
    grid = v.TimeGrid(10.0, 0.05)
    total = sum(
        v.simulate_pair(spec, grid, v.NoiseStream(3, i)).clamp_count for i in range(50)
    )
    assert total > 0


def test_horizon_prefix_bitwise_equality(sim):
    spec = v.table1_spec("row6")
    long_path = sim(spec, 5.0, 0.01, seed=99, idx=2)
    short_path = sim(spec, 2.0, 0.01, seed=99, idx=2)
    pre = long_path.prefix(2.0)
    np.testing.assert_array_equal(pre.x, short_path.x)
    np.testing.assert_array_equal(pre.y, short_path.y)
    np.testing.assert_array_equal(pre.dw, short_path.dw)


def test_simulation_error_names_the_step():
    vol = v.VolatilityModel.bachelier(0.0, 1.0, y0=1.0)
    spec = v.linear_spec(1e8, v.CoefFn.constant(1.0), vol, x0=1.0)
    grid = v.TimeGrid(1.0, 0.001)
    with pytest.raises(v.SimulationError) as exc_info:
        v.simulate_pair(spec, grid, v.NoiseStream(1, 0))
    assert exc_info.value.step is not None
    assert str(exc_info.value.step) in str(exc_info.value)


def test_coarsen():
    dw = np.array([1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
    np.testing.assert_array_equal(v.coarsen(dw, 3), [6.0, 15.0])
    np.testing.assert_array_equal(v.coarsen(dw, 1), dw)
    with pytest.raises(v.DomainError):
        v.coarsen(dw, 4)
    with pytest.raises(v.DomainError):
        v.coarsen(dw, 0)


def test_coarsened_path_reaches_same_brownian_endpoint(sim, unit_spec):
    path = sim(unit_spec, 1.0, 0.01)
    dw_c = v.coarsen(path.dw, 10)
    assert float(dw_c.sum()) == pytest.approx(float(path.dw.sum()), rel=1e-12)
    assert dw_c.shape == (10,)


# ---------------------------------------------------------------------------
# CSV round trip

def test_path_csv_round_trip(sim):
    spec = v.table1_spec("row1")
    path = sim(spec, 2.0, 0.25, seed=5)
    buf = io.StringIO()
    v.dump_path_csv(path, buf, header_lines=("k=v", "note"))
    text = buf.getvalue()
    assert text.startswith("# k=v\n# note\n")
    assert "t,x,y,dw" in text
    back = v.load_path_csv(io.StringIO(text))
    np.testing.assert_array_equal(back.x, path.x)
    np.testing.assert_array_equal(back.y, path.y)
    np.testing.assert_array_equal(back.dw, path.dw)
    assert back.grid == path.grid


def test_path_csv_observed_data_has_no_increments(sim, unit_spec):
    path = sim(unit_spec, 1.0, 0.25)
    buf = io.StringIO()
    v.dump_path_csv(path, buf)
    # strip the dw column entirely: observed data
    lines = buf.getvalue().splitlines()
    stripped = "\n".join(",".join(line.split(",")[:3]) for line in lines)
    back = v.load_path_csv(io.StringIO(stripped))
    assert back.dw is None
    np.testing.assert_array_equal(back.x, path.x)
    spec = unit_spec
    with pytest.raises(v.UnsupportedDataError):
        v.martingale_ratio(spec, back)


def test_path_csv_rejects_malformed():
    with pytest.raises(v.DomainError):
        v.load_path_csv(io.StringIO("a,b,c\n1,2,3\n2,3,4\n"))
    with pytest.raises(v.DomainError):
        v.load_path_csv(io.StringIO("t,x,y\n0,1,1\n"))
    with pytest.raises(v.DomainError):
        v.load_path_csv(io.StringIO("t,x,y\n0,1,1\n1,2,2\n3,3,3\n"))
    with pytest.raises(v.DomainError):
        v.load_path_csv(io.StringIO("t,x,y\n0,1,1\n1,nan,2\n"))


@given(
    seed=st.integers(0, 2**32),
    idx=st.integers(0, 100),
    n=st.integers(2, 40),
)
@settings(max_examples=20, deadline=None)
def test_path_csv_round_trip_property(seed, idx, n):
    spec = v.table1_spec("row7")
    grid = v.TimeGrid(n * 0.125, 0.125)
    path = v.simulate_pair(spec, grid, v.NoiseStream(seed, idx))
    buf = io.StringIO()
    v.dump_path_csv(path, buf)
    back = v.load_path_csv(io.StringIO(buf.getvalue()))
    np.testing.assert_array_equal(back.x, path.x)
    np.testing.assert_array_equal(back.y, path.y)
    np.testing.assert_array_equal(back.dw, path.dw)
