import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ucinfer.priors import (
    DemandPriorConfig,
    Sinusoid,
    ThetaPrior,
    demand_mean,
    log_prior_theta,
    sample_demand,
    sample_theta,
    theta_in_support,
)


def box(low, high, d=9):
    return ThetaPrior(low=np.full(d, low), high=np.full(d, high))


def test_prior_validation():
    with pytest.raises(ValueError):
        ThetaPrior(low=np.array([1.0, 2.0]), high=np.array([2.0, 2.0]))
    with pytest.raises(ValueError):
        ThetaPrior(low=np.array([-1.0]), high=np.array([1.0]))


def test_samples_stay_in_tiny_box(rng):
    prior = box(5.0, 5.0 + 1e-9, d=4)
    for _ in range(100):
        t = sample_theta(prior, rng)
        assert np.all(t.costs >= prior.low) and np.all(t.costs <= prior.high)


def test_sample_mean_matches_uniform_moments():
    prior = box(10.0, 40.0, d=3)
    rng = np.random.default_rng(123)
    n = 100_000
    draws = np.stack([sample_theta(prior, rng).costs for _ in range(n)])
    se = (40 - 10) / math.sqrt(12 * n)
    np.testing.assert_allclose(draws.mean(axis=0), 25.0, atol=3 * se)


def test_fixed_seed_reproducible():
    prior = box(1.0, 2.0, d=5)
    a = sample_theta(prior, np.random.default_rng(9))
    b = sample_theta(prior, np.random.default_rng(9))
    np.testing.assert_array_equal(a.costs, b.costs)


def test_log_prior_closed_forms():
    unit_box = box(1e-12, 1.0, d=9)  # effectively [0, 1]
    inside = sample_theta(unit_box, np.random.default_rng(0))
    assert log_prior_theta(unit_box, inside) == pytest.approx(0.0, abs=1e-9)

    two_box = box(1e-12, 2.0, d=9)
    t = sample_theta(two_box, np.random.default_rng(1))
    assert log_prior_theta(two_box, t) == pytest.approx(-9 * math.log(2), abs=1e-9)

    from ucinfer.core import ThetaVector

    outside = ThetaVector(np.full(9, 3.0))
    assert log_prior_theta(two_box, outside) == -math.inf


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_support_property(seed):
    prior = box(10.0, 40.0, d=3)
    t = sample_theta(prior, np.random.default_rng(seed))
    assert log_prior_theta(prior, t) > -math.inf
    assert theta_in_support(prior, t.costs[None, :])[0]


def test_constant_demand_without_noise():
    cfg = DemandPriorConfig(base=100.0, amplitudes=(), noise_sigma_fraction=0.0)
    d = sample_demand(cfg, 24, np.random.default_rng(0))
    np.testing.assert_array_equal(d.demand, np.full(24, 100.0))


def test_single_sinusoid_closed_form():
    cfg = DemandPriorConfig(
        base=100.0, amplitudes=(Sinusoid(20.0, 24.0, 0.5),),
        noise_sigma_fraction=0.0,
    )
    d = sample_demand(cfg, 24, np.random.default_rng(0))
    t = np.arange(24.0)
    expected = 100.0 + 20.0 * np.sin(2 * np.pi * t / 24.0 + 0.5)
    np.testing.assert_allclose(d.demand, expected, rtol=1e-15)


def test_noise_scale_is_fraction_of_peak():
    cfg = DemandPriorConfig(
        base=100.0, amplitudes=(Sinusoid(20.0, 24.0, 0.0),),
        noise_sigma_fraction=0.1,
    )
    peak = demand_mean(cfg, 24).max()
    rng = np.random.default_rng(7)
    draws = np.array([sample_demand(cfg, 24, rng).demand[0] for _ in range(100_000)])
    # demand at t=0 sits at the base, far from the floor, so no clamping
    assert abs(draws.std() - 0.1 * peak) < 0.02 * (0.1 * peak)


def test_floor_clamps_negative_noise():
    cfg = DemandPriorConfig(
        base=10.0, amplitudes=(), noise_sigma_fraction=0.9, floor=0.0
    )
    rng = np.random.default_rng(3)
    for _ in range(200):
        assert np.all(sample_demand(cfg, 6, rng).demand >= 0.0)


def test_demand_config_validation():
    with pytest.raises(ValueError):
        DemandPriorConfig(base=-5.0)
    with pytest.raises(ValueError):
        DemandPriorConfig(base=10.0, noise_sigma_fraction=1.5)
    with pytest.raises(ValueError):
        DemandPriorConfig(base=10.0, amplitudes=(Sinusoid(1.0, -24.0, 0.0),))
