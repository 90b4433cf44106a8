import math

import numpy as np
import pytest

from fixedterm.errors import InfeasibleCapitalError, InvalidArgumentError
from fixedterm.split import solve_split, split_capital, v0_min, value_derivative
from fixedterm.uoc import solve_uoc, v1_min
from fixedterm.uow import optimize_psi2, v2_min


def test_v0_min(base):
    ref = 3.0 * (1 - math.exp(-0.09)) / 0.03 + 80 * math.exp(-0.09)
    assert v0_min(base) == pytest.approx(ref, rel=1e-15)
    assert round(ref, 2) == 81.72


def test_split_adds_up(base):
    res = solve_split(100.0, base)
    assert res.v1_star + res.v2_star == pytest.approx(100.0, rel=1e-15)


def test_base_split_hits_floor_cost(base):
    # consumption's marginal value dominates at the base case
    res, uoc, uow = split_capital(base)
    assert res.projected
    assert res.v2_star == pytest.approx(v2_min(base.constraints, base.market, 3.0), rel=1e-12)
    assert uoc.lambda1 > uow.lambda2


def test_interior_split_equalises_multipliers(base):
    sc = base.with_param("T", 1.0)
    res, uoc, uow = split_capital(sc)
    assert not res.projected
    assert uoc.lambda1 == pytest.approx(uow.lambda2, rel=1e-7)


def test_envelope_and_difference_modes_agree(base):
    sc = base.with_param("T", 1.0)
    a = split_capital(sc)[0]
    b = split_capital(sc.with_numerics(split_derivative="fd"))[0]
    assert a.v1_star == pytest.approx(b.v1_star, rel=1e-6)


def test_infeasible_and_minimum_capital(base):
    with pytest.raises(InfeasibleCapitalError):
        solve_split(50.0, base)
    nonattr = base.with_param("delta_mu", 0.0)
    res, uoc, uow = split_capital(nonattr.with_param("v0", v0_min(nonattr)))
    assert uoc.lambda1 is None and uow.psi2_star == 0.0


def test_total_value_concave_in_consumption_capital(base):
    lo = v1_min(base.constraints, base.market, 3.0)
    hi = 100.0 - v2_min(base.constraints, base.market, 3.0)
    v1 = np.linspace(lo + 1e-6, hi - 1e-6, 17)
    tot = np.array([solve_uoc(v, base).value + optimize_psi2(100.0 - v, base).value for v in v1])
    assert np.all(np.diff(tot, 2) <= 1e-9 * np.abs(tot[1:-1]))


def test_value_derivative_helper():
    assert value_derivative(lambda x: x ** 3, 2.0, 1e-4) == pytest.approx(12.0, rel=1e-7)
    assert value_derivative(lambda x: x ** 3, 2.0, 1e-2, richardson=True) == pytest.approx(12.0, rel=1e-9)
    assert value_derivative(lambda x: math.log(x), 1.0, 2.0, lower=0.5) == pytest.approx(1.0, rel=1e-1)
    with pytest.raises(InvalidArgumentError):
        value_derivative(lambda x: x, 0.5, 0.1, lower=0.5)
