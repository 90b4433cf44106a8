import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import quad_oracle
from fixedterm.bound import put_price_x_B
from fixedterm.errors import InfeasibleCapitalError, NoFreeCapital, UndefinedStrategyError
from fixedterm.market import MarketState, Scenario
from fixedterm.uoc import BoundaryFlag
from fixedterm.uow import (CaseTag, auxiliary_budget, case_discriminant, case_tag, conditional_value,
                           feasible_psi_max, fixed_position, optimize_psi2, replication_value, solve_lambda2,
                           solve_uow, terminal_wealth_V2, uow_strategy, uow_wealth, uow_wealth_dz, v2_min)

CASES = {"CaseI": 0.05, "CaseII": 0.10, "CaseIII": 0.25}


def test_v2_min_closed_form(base):
    ref = 80.0 * math.exp(-0.09)
    assert v2_min(base.constraints, base.market, 3.0) == pytest.approx(ref, rel=1e-15)
    assert round(ref, 4) == 73.1145


@pytest.mark.parametrize("name,sigma_f", CASES.items())
def test_case_tags(base, name, sigma_f):
    sc = base.with_param("sigma_f", sigma_f)
    assert case_tag(10.0, sc).value == name
    assert case_tag(0.0, sc) is CaseTag.PSI_ZERO
    assert case_tag(10.0, base.with_param("sigma_f", 0.0)) is CaseTag.DETERMINISTIC_F
    assert case_discriminant(0.2, 0.1, -1.0) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("sigma_f", CASES.values())
@pytest.mark.parametrize("psi,v2", [(30.0, 90.0), (60.0, 95.0), (10.0, 76.0)])
def test_conditional_solution_matches_quadrature(base, sigma_f, psi, v2):
    sc = base.with_param("sigma_f", sigma_f)
    sol = solve_uow(psi, v2, sc)
    util, cost = quad_oracle.terminal_expectations(psi, sol.lambda2, sc)
    assert sol.value == pytest.approx(util, rel=1e-9)
    # all liquid capital finances wealth above the asset payoff
    assert cost == pytest.approx(v2 - psi * sc.illiquid.f0, rel=1e-9)


@pytest.mark.parametrize("sigma_f", CASES.values())
def test_initial_wealth_is_liquid_capital(base, sigma_f):
    sc = base.with_param("sigma_f", sigma_f)
    sol = solve_uow(35.0, 92.0, sc)
    x0 = uow_wealth(MarketState(0.0, 1.0, sc.illiquid.f0), sol, sc)
    assert x0 == pytest.approx(92.0 - 35.0, rel=1e-10)
    assert sol.x_b + sol.x_tilde2 == pytest.approx(92.0 - 35.0, rel=1e-14)
    assert auxiliary_budget(sol.lambda2, 35.0, sc) == pytest.approx(sol.x_tilde2, rel=1e-9)


def test_no_free_capital(base):
    with pytest.raises(NoFreeCapital):
        solve_lambda2(0.0, 10.0, base)


def test_position_beyond_budget_is_infeasible(base):
    with pytest.raises(InfeasibleCapitalError):
        solve_uow(80.0, 75.0, base)


def test_feasible_psi_max_exhausts_capital(base):
    v2 = 80.0
    pm = feasible_psi_max(v2, base)
    assert pm * base.illiquid.f0 + put_price_x_B(pm, base) == pytest.approx(v2, rel=1e-10)
    # at the limit the position is pure replication
    assert conditional_value(pm, v2, base) == pytest.approx(replication_value(pm, base), rel=1e-6)


@pytest.mark.parametrize("v2", [73.2, 80.0, 95.0])
def test_conditional_value_concave_in_position(base, v2):
    ps = np.linspace(0.0, feasible_psi_max(v2, base), 17)
    vals = np.array([conditional_value(p, v2, base) for p in ps])
    assert np.all(np.diff(vals, 2) <= 1e-9 * np.abs(vals[1:-1]))


@pytest.mark.parametrize("delta_mu", [0.0, -0.01])
def test_non_attractive_asset_never_held(base, delta_mu):
    sc = base.with_param("delta_mu", delta_mu)
    assert optimize_psi2(90.0, sc).psi2_star == 0.0
    vmin = v2_min(sc.constraints, sc.market, sc.horizon_T)
    assert feasible_psi_max(vmin, sc) == 0.0
    at_min = optimize_psi2(vmin, sc)
    assert at_min.boundary_flag is BoundaryFlag.AT_MINIMUM
    assert at_min.value == pytest.approx(80.0 ** -1 / -1)
    # with no free capital the wealth is the discounted floor
    t = 1.3
    assert uow_wealth(MarketState(t, 0.9, 1.0), at_min, sc) == pytest.approx(80 * math.exp(-0.03 * (3 - t)), rel=1e-12)


def test_attractive_asset_held_at_floor_cost(base):
    vmin = v2_min(base.constraints, base.market, 3.0)
    sol = optimize_psi2(vmin, base)
    assert sol.psi2_star > 0
    assert sol.value > 80.0 ** -1 / -1
    assert feasible_psi_max(vmin, base) > 0


def test_optimum_beats_neighbours(base):
    sol = optimize_psi2(85.0, base)
    for dp in (-0.5, 0.5):
        assert conditional_value(sol.psi2_star + dp, 85.0, base) <= sol.value


def test_below_floor_cost_rejected(base):
    with pytest.raises(InfeasibleCapitalError):
        optimize_psi2(70.0, base)
    with pytest.raises(InfeasibleCapitalError):
        fixed_position(0.0, 70.0, base)


@given(lz=st.floats(-3.0, 3.0))
def test_terminal_wealth_dominates_floor_and_asset(lz):
    sc = Scenario()
    sol = solve_uow(40.0, 90.0, sc)
    zT = math.exp(lz)
    fT = float(math.exp(0.00625 * 3) * zT ** -sc.kappa)
    v = terminal_wealth_V2(zT, fT, sol, sc)
    assert v >= 80.0 and v >= 40.0 * fT


@given(t=st.floats(0.05, 2.9), lz=st.floats(-0.5, 0.5), lf=st.floats(-0.3, 0.3))
def test_wealth_derivative(t, lz, lf):
    sc = Scenario()
    sol = solve_uow(40.0, 90.0, sc)
    z, f = math.exp(lz), math.exp(lf)

    def x(v):
        return uow_wealth(MarketState(t, v, f * (z / v) ** sc.kappa), sol, sc)
    h = 1e-5 * z
    fd = (x(z + h) - x(z - h)) / (2 * h)
    assert uow_wealth_dz(MarketState(t, z, f), sol, sc) == pytest.approx(fd, rel=1e-5, abs=1e-8 * x(z) / z)


def test_strategy_limit_and_horizon(base):
    sc = base.with_param("v_floor", 1e-9)
    sol = solve_uow(0.0, 50.0, sc)
    merton = base.gamma / (base.market.sigma * (1.0 - base.prefs.p2))
    assert uow_strategy(MarketState(1.0, 1.2, 1.0), sol, sc) == pytest.approx(merton, rel=1e-6)
    with pytest.raises(UndefinedStrategyError):
        uow_strategy(MarketState(3.0, 1.0, 1.0), sol, sc)


def test_case_boundary_continuity(base):
    sig = base.gamma / (1.0 - base.prefs.p2)
    vals, wealth = [], []
    for s in (sig * (1 - 1e-7), sig, sig * (1 + 1e-7)):
        sc = base.with_param("sigma_f", s)
        sol = solve_uow(30.0, 85.0, sc)
        vals.append(sol.value)
        wealth.append(uow_wealth(MarketState(1.5, 1.0, 1.0), sol, sc))
    assert vals[0] == pytest.approx(vals[1], rel=1e-6) and vals[2] == pytest.approx(vals[1], rel=1e-6)
    assert wealth[0] == pytest.approx(wealth[1], rel=1e-6) and wealth[2] == pytest.approx(wealth[1], rel=1e-6)
