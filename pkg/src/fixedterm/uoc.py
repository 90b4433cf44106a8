"""Optimal consumption with a subsistence floor."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InfeasibleCapitalError, NumericalError, UndefinedStrategyError
from .market import Constraints, MarketSpec, Preferences, Scenario
from .xi import crossing_times, time_nodes, truncated_moment, truncated_moment_dz


class BoundaryFlag(enum.Enum):
    INTERIOR = "Interior"
    AT_MINIMUM = "AtMinimum"


@dataclass(frozen=True)
class UoCSolution:
    v1: float
    lambda1: float | None
    value: float
    boundary_flag: BoundaryFlag


def v1_min(constraints: Constraints, market: MarketSpec, T: float) -> float:
    """Cost of consuming exactly the floor until T."""
    return constraints.c_floor * -math.expm1(-market.r * T) / market.r


def consumption_budget(lambda1: float, scenario: Scenario) -> float:
    """Time-0 value of the consumption plan induced by ``lambda1``."""
    x, w = kernels.quad_rule(scenario.numerics.quad_nodes)
    return kernels.impl.uoc_budget(lambda1, scenario.prefs.p1, scenario.constraints.c_floor,
                                   scenario.horizon_T, scenario.gamma, scenario.market.r, x, w)


def _check_capital(v1: float, scenario: Scenario, strict: bool) -> float:
    vmin = v1_min(scenario.constraints, scenario.market, scenario.horizon_T)
    if v1 < vmin or (strict and v1 <= vmin):
        raise InfeasibleCapitalError(
            f"consumption capital {v1:.12g} does not exceed the floor cost {vmin:.12g}", required=vmin)
    return vmin


def solve_lambda1(v1: float, scenario: Scenario, tol: float | None = None) -> float:
    """Multiplier whose consumption plan costs exactly ``v1``."""
    _check_capital(v1, scenario, strict=True)
    x, w = kernels.quad_rule(scenario.numerics.quad_nodes)
    lam = kernels.impl.uoc_lambda(v1, scenario.prefs.p1, scenario.constraints.c_floor,
                                  scenario.horizon_T, scenario.gamma, scenario.market.r, x, w,
                                  tol or scenario.numerics.bisect_tol)
    if not math.isfinite(lam) or lam <= 0:
        raise NumericalError(f"consumption multiplier not bracketed for v1={v1!r}")
    return lam


def solve_uoc(v1: float, scenario: Scenario, tol: float | None = None) -> UoCSolution:
    vmin = _check_capital(v1, scenario, strict=False)
    p1, cf = scenario.prefs.p1, scenario.constraints.c_floor
    if v1 <= vmin:
        return UoCSolution(v1, None, scenario.horizon_T * cf ** p1 / p1, BoundaryFlag.AT_MINIMUM)
    lam = solve_lambda1(v1, scenario, tol)
    x, w = kernels.quad_rule(scenario.numerics.quad_nodes)
    value = kernels.impl.uoc_value(lam, p1, cf, scenario.horizon_T, scenario.gamma,
                                   scenario.market.r, x, w)
    return UoCSolution(v1, lam, value, BoundaryFlag.INTERIOR)


def uoc_value(v1: float, scenario: Scenario) -> float:
    return solve_uoc(v1, scenario).value


def optimal_consumption(t, z, lambda1: float | None, prefs: Preferences, c_floor: float):
    """Unconstrained rate ``(lambda1 z)^(1/(p1-1))`` lifted to the floor."""
    z = np.asarray(z, dtype=float)
    if lambda1 is None:
        out = np.full(np.broadcast(np.asarray(t), z).shape, float(c_floor))
    else:
        out = np.maximum(np.exp(np.log(lambda1 * z) / (prefs.p1 - 1.0)), c_floor)
    return out if out.ndim else float(out)


def _integrals(t, z, lambda1: float, scenario: Scenario, derivative: bool):
    """Time integrals of the discounted consumption stream and its z-derivative."""
    T = scenario.horizon_T
    g, r = scenario.gamma, scenario.market.r
    p1, cf = scenario.prefs.p1, scenario.constraints.c_floor
    t, z = np.broadcast_arrays(np.asarray(t, float), np.asarray(z, float))
    shape = t.shape
    t, z = t.ravel(), z.ravel()
    k1 = p1 / (p1 - 1.0)
    c1 = math.exp(math.log(lambda1) / (p1 - 1.0))
    zc = math.exp((p1 - 1.0) * math.log(cf) - math.log(lambda1))
    cuts = np.stack([crossing_times(z, k1, zc, g, r), crossing_times(z, 1.0, zc, g, r)], axis=1)
    tau, wts = time_nodes(T - t, cuts, scenario.numerics.quad_nodes)
    s = t[:, None] + tau
    zz = z[:, None]
    inf = math.inf
    j = np.sum(wts * (c1 * truncated_moment(s, t[:, None], zz, k1, 0.0, zc, g, r)
                      + cf * truncated_moment(s, t[:, None], zz, 1.0, zc, inf, g, r)), axis=1)
    if not derivative:
        return j.reshape(shape), None
    dj = np.sum(wts * (c1 * truncated_moment_dz(s, t[:, None], zz, k1, 0.0, zc, g, r)
                       + cf * truncated_moment_dz(s, t[:, None], zz, 1.0, zc, inf, g, r)), axis=1)
    return j.reshape(shape), dj.reshape(shape)


def uoc_wealth(t, z, lambda1: float | None, scenario: Scenario):
    """Liquid wealth financing the remaining optimal consumption at (t, z)."""
    if lambda1 is None:
        r = scenario.market.r
        out = scenario.constraints.c_floor * -np.expm1(-r * (scenario.horizon_T - np.asarray(t, float))) / r
        out = out * np.ones_like(np.asarray(z, float))
        return out if out.ndim else float(out)
    j, _ = _integrals(t, z, lambda1, scenario, derivative=False)
    out = j / np.asarray(z, float)
    return out if out.ndim else float(out)


def uoc_wealth_dz(t, z, lambda1: float | None, scenario: Scenario):
    if lambda1 is None:
        out = np.zeros(np.broadcast(np.asarray(t), np.asarray(z)).shape)
        return out if out.ndim else 0.0
    z = np.asarray(z, float)
    j, dj = _integrals(t, z, lambda1, scenario, derivative=True)
    out = (dj - j / z) / z
    return out if out.ndim else float(out)


def uoc_strategy(t, z, lambda1: float | None, scenario: Scenario):
    """Fraction of consumption wealth held in the risky asset."""
    if np.any(np.asarray(t) >= scenario.horizon_T):
        raise UndefinedStrategyError("strategy undefined at the horizon")
    if lambda1 is None:
        out = np.zeros(np.broadcast(np.asarray(t), np.asarray(z)).shape)
        return out if out.ndim else 0.0
    z = np.asarray(z, float)
    j, dj = _integrals(t, z, lambda1, scenario, derivative=True)
    if np.any(j <= 0):
        raise UndefinedStrategyError("consumption wealth is zero")
    g = scenario.gamma
    # X = J/z, so -gamma z X'/(sigma X) = gamma (1 - z J'/J) / sigma
    out = g * (1.0 - z * dj / j) / scenario.market.sigma
    return out if out.ndim else float(out)
