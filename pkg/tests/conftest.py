import numpy as np
import pytest

import volest as v


@pytest.fixture
def unit_spec():
    """Constant coefficients everywhere: theta_hat - theta = W_T/T exactly."""
    return v.ModelSpec(
        theta=2.0,
        a=v.CoefFn.constant(1.0),
        sigma1=v.CoefFn.constant(1.0),
        sigma2=v.CoefFn.constant(1.0),
        vol=v.VolatilityModel.bachelier(0.0, 1.0, y0=1.0),
        x0=0.0,
    )


@pytest.fixture
def ou_control_spec():
    """Mean-reverting drift keeps the state bounded over long horizons."""
    return v.ModelSpec(
        theta=2.0,
        a=v.CoefFn.affine_mean_rev(-1.0, 0.0),
        sigma1=v.CoefFn.constant(1.0),
        sigma2=v.CoefFn.constant(1.0),
        vol=v.VolatilityModel.bachelier(0.0, 1.0, y0=1.0),
        x0=1.0,
    )


@pytest.fixture
def unit_config(unit_spec):
    """Flat key=value form of the unit spec (model keys only)."""
    return v.spec_to_config(unit_spec)


def simulate(spec, T, h, seed=1, idx=0):
    grid = v.TimeGrid(T, h)
    return v.simulate_pair(spec, grid, v.NoiseStream(seed, idx))


@pytest.fixture
def sim():
    return simulate
