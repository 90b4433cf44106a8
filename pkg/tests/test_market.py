import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fixedterm.errors import InvalidArgumentError, InvalidSpecError
from fixedterm.market import (Attractiveness, IlliquidSpec, MarketSpec, MarketState, NumericsConfig,
                              Preferences, Scenario, asset_growth_exponent, asset_on_manifold,
                              classify_nonredundancy, make_rng, pricing_kernel_value, simulate_paths)


def test_base_defaults(base):
    assert (base.market.r, base.market.mu, base.market.sigma) == (0.03, 0.08, 0.25)
    assert (base.illiquid.mu_f, base.illiquid.sigma_f) == (0.10, 0.25)
    assert (base.prefs.p1, base.prefs.p2) == (-2.0, -1.0)
    assert (base.constraints.c_floor, base.constraints.v_floor) == (3.0, 80.0)
    assert (base.horizon_T, base.v0) == (3.0, 100.0)
    assert base.gamma == pytest.approx(0.2, rel=1e-15)
    assert base.kappa == pytest.approx(1.25, rel=1e-15)


@pytest.mark.parametrize("bad", [
    lambda: MarketSpec(sigma=0.0),
    lambda: MarketSpec(r=-0.01),
    lambda: IlliquidSpec(f0=0.0),
    lambda: IlliquidSpec(sigma_f=-0.1),
    lambda: Preferences(p1=0.0),
    lambda: Preferences(p2=1.0),
    lambda: Scenario(horizon_T=0.0),
    lambda: Scenario(v0=-1.0),
    lambda: Scenario(market=MarketSpec(mu=0.02)),
    lambda: NumericsConfig(quad_nodes=0),
    lambda: NumericsConfig(bisect_tol=1.0),
    lambda: NumericsConfig(split_derivative="newton"),
])
def test_invalid_specs_rejected(bad):
    with pytest.raises(InvalidSpecError):
        bad()


def test_with_param_and_aliases(base):
    assert base.with_param("T", 1).horizon_T == 1.0
    assert base.with_param("delta_mu", 0.015).illiquid.mu_f == pytest.approx(0.095)
    assert base.with_param("delta_sigma", -0.10).illiquid.sigma_f == pytest.approx(0.35)
    assert base.with_param("v_floor", 90).constraints.v_floor == 90.0
    with pytest.raises(InvalidArgumentError):
        base.with_param("nope", 1.0)


def test_scaled_multiplies_money_only(base):
    s = base.scaled(10)
    assert (s.v0, s.illiquid.f0, s.constraints.c_floor, s.constraints.v_floor) == (1000, 10, 30, 800)
    assert s.market == base.market and s.prefs == base.prefs


def test_classification():
    m = MarketSpec()
    assert classify_nonredundancy(m, IlliquidSpec()) is Attractiveness.STRICTLY_ATTRACTIVE
    assert classify_nonredundancy(m, IlliquidSpec(mu_f=0.08)) is Attractiveness.INDIFFERENT
    assert classify_nonredundancy(m, IlliquidSpec(mu_f=0.07)) is Attractiveness.REDUNDANT
    # equal Sharpe ratio at a different volatility
    assert classify_nonredundancy(m, IlliquidSpec(mu_f=0.03 + 0.2 * 0.35, sigma_f=0.35)) is Attractiveness.INDIFFERENT
    assert classify_nonredundancy(m, IlliquidSpec(mu_f=0.03, sigma_f=0.0)) is Attractiveness.INDIFFERENT


def test_state_validation():
    MarketState(0.5, np.array([0.5, 1.0]), 1.0)
    with pytest.raises(InvalidArgumentError):
        MarketState(0.5, 0.0, 1.0)
    with pytest.raises(InvalidArgumentError):
        MarketState(-0.1, 1.0, 1.0)


def test_kernel_martingale_discount(base):
    # E[Z(t)] = exp(-r t) under exact sampling
    paths = simulate_paths(base, 200_000, 4, seed=7)
    mean_zT = paths.z[:, -1].mean()
    se = paths.z[:, -1].std() / math.sqrt(paths.z.shape[0])
    assert abs(mean_zT - math.exp(-base.market.r * base.horizon_T)) < 4 * se


def test_paths_reproducible_and_on_manifold(base):
    a = simulate_paths(base, 50, 8, seed=3)
    b = simulate_paths(base, 50, 8, seed=3)
    np.testing.assert_array_equal(a.w, b.w)
    np.testing.assert_allclose(a.f, asset_on_manifold(a.t, a.z, base), rtol=1e-12)
    np.testing.assert_allclose(a.z, pricing_kernel_value(a.t, a.w, base.market), rtol=0)


def test_rng_is_counter_based():
    assert make_rng(5).standard_normal() == make_rng(5).standard_normal()
    assert make_rng(5).standard_normal() != make_rng(6).standard_normal()


@given(t=st.floats(0.0, 5.0), w=st.floats(-3.0, 3.0),
       mu_f=st.floats(0.0, 0.2), sigma_f=st.floats(0.01, 0.6))
def test_asset_on_manifold_matches_dynamics(t, w, mu_f, sigma_f):
    sc = Scenario(illiquid=IlliquidSpec(mu_f=mu_f, sigma_f=sigma_f))
    z = pricing_kernel_value(t, w, sc.market)
    direct = math.exp((mu_f - 0.5 * sigma_f ** 2) * t + sigma_f * w)
    assert float(asset_on_manifold(t, z, sc)) == pytest.approx(direct, rel=1e-10)


def test_deterministic_growth_exponent():
    assert asset_growth_exponent(IlliquidSpec(mu_f=0.05, sigma_f=0.0), MarketSpec()) == 0.05
