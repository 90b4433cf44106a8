"""Full policy assembly and the allocation metrics built on it."""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleCapitalError, NumericalError
from .market import MarketState, Scenario
from .roots import find_root
from .split import SplitResult, split_capital
from .uoc import UoCSolution, optimal_consumption, uoc_wealth, uoc_wealth_dz, v1_min
from .uow import UoWSolution, uow_wealth, uow_wealth_dz

BRACKET_START = 0.5
BRACKET_CAP = 10.0
METRIC_XTOL = 1e-10


@dataclass(frozen=True)
class PolicySolution:
    split: SplitResult
    uoc: UoCSolution
    uow: UoWSolution
    total_value: float

    @property
    def psi_star(self) -> float:
        return self.uow.psi2_star


@dataclass(frozen=True)
class PolicyEvaluation:
    c_rate: float
    pi_fraction: float
    liquid_wealth: float


@functools.lru_cache(maxsize=256)
def _solve_cached(scenario: Scenario, allow_position: bool) -> PolicySolution:
    split, s1, s2 = split_capital(scenario, allow_position)
    return PolicySolution(split, s1, s2, s1.value + s2.value)


def solve_policy(scenario: Scenario) -> PolicySolution:
    """Optimal consumption, liquid investment and fixed-term position."""
    return _solve_cached(scenario, True)


def liquid_only_value(v0: float, scenario: Scenario) -> float:
    """Optimal value when the fixed-term asset cannot be bought."""
    return _solve_cached(scenario.with_param("v0", v0), False).total_value


def evaluate_policy(state: MarketState, solution: PolicySolution, scenario: Scenario) -> PolicyEvaluation:
    """Consumption rate, risky fraction and liquid wealth at ``state`` (t < T)."""
    lam1 = solution.uoc.lambda1
    c = optimal_consumption(state.t, state.z, lam1, scenario.prefs, scenario.constraints.c_floor)
    x1 = np.asarray(uoc_wealth(state.t, state.z, lam1, scenario))
    x2 = np.asarray(uow_wealth(state, solution.uow, scenario))
    d1 = np.asarray(uoc_wealth_dz(state.t, state.z, lam1, scenario))
    d2 = np.asarray(uow_wealth_dz(state, solution.uow, scenario))
    x = x1 + x2
    z = np.asarray(state.z, float)
    with np.errstate(divide="ignore", invalid="ignore"):
        pi = np.where(x > 0, -scenario.gamma * z * (d1 + d2) / (scenario.market.sigma * x), 0.0)
    conv = (lambda a: a if np.ndim(a) else float(a))
    return PolicyEvaluation(conv(c), conv(pi), conv(x))


def osiw(solution: PolicySolution, scenario: Scenario) -> float:
    """Share of initial capital placed in the fixed-term asset."""
    return solution.psi_star * scenario.illiquid.f0 / scenario.v0


def _expand(f, lo: float, flo: float, hi: float, cap: float):
    """Double ``hi`` until ``f`` changes sign relative to ``flo``."""
    fhi = f(hi)
    while (fhi > 0) == (flo > 0) and fhi != 0:
        if hi >= cap:
            return hi, fhi, False
        hi = min(2.0 * hi, cap)
        fhi = f(hi)
    return hi, fhi, True


def svf(scenario: Scenario) -> float:
    """Relative capital increase that makes the liquid-only investor as well off."""
    target = solve_policy(scenario).total_value
    v0 = scenario.v0

    def gap(alpha: float) -> float:
        return liquid_only_value(v0 * (1.0 + alpha), scenario) - target

    g0 = gap(0.0)
    if g0 >= 0:
        return 0.0
    hi, ghi, ok = _expand(gap, 0.0, g0, BRACKET_START, BRACKET_CAP)
    if not ok:
        raise NumericalError(f"subjective value not bracketed below alpha={BRACKET_CAP}")
    return find_root(gap, 0.0, hi, xtol=METRIC_XTOL, flo=g0, fhi=ghi)


def max_guarantee_inflation(scenario: Scenario) -> float:
    """Largest relative guarantee increase still affordable with ``v0``."""
    c = scenario.constraints
    free = scenario.v0 - v1_min(c, scenario.market, scenario.horizon_T)
    return free * math.exp(scenario.market.r * scenario.horizon_T) / c.v_floor - 1.0


def geug(scenario: Scenario) -> float:
    """Relative guarantee increase affordable at unchanged utility thanks to F."""
    target = liquid_only_value(scenario.v0, scenario)
    vf = scenario.constraints.v_floor
    beta_max = max_guarantee_inflation(scenario)
    if beta_max <= 0:
        raise InfeasibleCapitalError("no room to raise the guarantee", required=None)
    cap = min(BRACKET_CAP, beta_max * (1.0 - 1e-9))

    def gap(beta: float) -> float:
        return solve_policy(scenario.with_param("v_floor", vf * (1.0 + beta))).total_value - target

    g0 = gap(0.0)
    if g0 <= 0:
        return 0.0
    hi, ghi, ok = _expand(gap, 0.0, g0, min(BRACKET_START, cap), cap)
    if not ok:
        raise NumericalError(f"guarantee gain not bracketed below beta={cap:.6g}")
    return find_root(gap, 0.0, hi, xtol=METRIC_XTOL, flo=g0, fhi=ghi)
