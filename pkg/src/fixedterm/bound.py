"""Replication of the guarantee shortfall put ``(V_floor - psi F(T))^+``."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvalidArgumentError, UndefinedStrategyError
from .market import Attractiveness, MarketState, Scenario, asset_growth_exponent, classify_nonredundancy
from .xi import h_factor, truncated_moment, truncated_moment_dz


@dataclass(frozen=True)
class BoundQuote:
    psi2: float
    x_b: float
    feasible: bool  # x_b + psi2 F0 fits inside the wealth-subproblem capital


def terminal_asset_scale(psi2: float, scenario: Scenario) -> float:
    """Constant A with ``psi2 F(T) = A Z(T)^-kappa`` along every path from F0."""
    return psi2 * scenario.illiquid.f0 * h_factor(0.0, scenario.horizon_T, scenario.illiquid, scenario.market)


def state_asset_scale(t, z, f, psi2: float, scenario: Scenario):
    """A conditioned on (t, z, f): ``psi2 f h(t, T) z^kappa``."""
    tau = scenario.horizon_T - np.asarray(t, float)
    lh = asset_growth_exponent(scenario.illiquid, scenario.market) * tau
    return psi2 * np.asarray(f, float) * np.exp(lh + scenario.kappa * np.log(z))


def floor_crossing(A, v_floor: float, kappa: float):
    """Kernel level below which ``A z^-kappa`` exceeds the floor (0 or inf when kappa = 0)."""
    A = np.asarray(A, float)
    with np.errstate(divide="ignore", over="ignore"):
        if kappa == 0.0:
            out = np.where(A > v_floor, math.inf, 0.0)
        else:
            out = np.where(A > 0, np.exp((np.log(np.where(A > 0, A, 1.0)) - math.log(v_floor)) / kappa), 0.0)
    return out


def put_price_x_B(psi2: float, scenario: Scenario) -> float:
    """Time-0 cost of replicating ``(V_floor - psi2 F(T))^+``."""
    if psi2 < 0:
        raise InvalidArgumentError(f"psi2 must be non-negative, got {psi2!r}")
    A = terminal_asset_scale(psi2, scenario)
    return kernels.impl.put_price(A, scenario.constraints.v_floor, scenario.kappa,
                                  scenario.horizon_T, scenario.gamma, scenario.market.r)


def call_price(psi2: float, scenario: Scenario) -> float:
    """Time-0 cost of ``(psi2 F(T) - V_floor)^+``."""
    A = terminal_asset_scale(psi2, scenario)
    if A <= 0:
        return 0.0
    vf, kappa = scenario.constraints.v_floor, scenario.kappa
    T, g, r = scenario.horizon_T, scenario.gamma, scenario.market.r
    zvf = kernels.impl.floor_crossing(A, vf, kappa)
    return max(A * kernels.impl.xi(T, 0.0, 1.0, 1.0 - kappa, 0.0, zvf, g, r)
               - vf * kernels.impl.xi(T, 0.0, 1.0, 1.0, 0.0, zvf, g, r), 0.0)


def excess_return_factor(scenario: Scenario) -> float:
    """``E[Z(T) F(T)] / F0 - 1``: what one unit of F returns above its price."""
    if classify_nonredundancy(scenario.market, scenario.illiquid) is Attractiveness.INDIFFERENT:
        return 0.0
    ill, m = scenario.illiquid, scenario.market
    drift = ill.mu_f - m.r - (ill.sigma_f * scenario.gamma if ill.sigma_f > 0 else 0.0)
    return math.expm1(drift * scenario.horizon_T)


def free_capital(psi2: float, v2: float, scenario: Scenario) -> float:
    """``v2 - psi2 F0 - x_B`` written through put-call parity to avoid cancellation.

    Near the floor cost the direct difference loses every digit; here the
    small terms are computed on their own.
    """
    vmin = math.exp(-scenario.market.r * scenario.horizon_T) * scenario.constraints.v_floor
    return ((v2 - vmin) + psi2 * scenario.illiquid.f0 * excess_return_factor(scenario)
            - call_price(psi2, scenario))


def quote(psi2: float, v2: float, scenario: Scenario) -> BoundQuote:
    xb = put_price_x_B(psi2, scenario)
    return BoundQuote(psi2, xb, free_capital(psi2, v2, scenario) >= 0.0)


def _put_parts(state: MarketState, psi2: float, scenario: Scenario, derivative: bool):
    T, vf, kappa = scenario.horizon_T, scenario.constraints.v_floor, scenario.kappa
    g, r = scenario.gamma, scenario.market.r
    t, z, f = np.broadcast_arrays(*(np.asarray(v, float) for v in (state.t, state.z, state.f)))
    A = state_asset_scale(t, z, f, psi2, scenario)
    zvf = floor_crossing(A, vf, kappa)
    j = vf * truncated_moment(T, t, z, 1.0, zvf, math.inf, g, r) \
        - A * truncated_moment(T, t, z, 1.0 - kappa, zvf, math.inf, g, r)
    if not derivative:
        return z, j, None
    dj = vf * truncated_moment_dz(T, t, z, 1.0, zvf, math.inf, g, r) \
        - A * truncated_moment_dz(T, t, z, 1.0 - kappa, zvf, math.inf, g, r)
    return z, j, dj


def _out(x):
    return x if np.ndim(x) else float(x)


def put_value_X_B(state: MarketState, psi2: float, scenario: Scenario):
    """Value at ``state`` of the portfolio replicating the shortfall put."""
    z, j, _ = _put_parts(state, psi2, scenario, derivative=False)
    return _out(j / z)


def put_value_dz(state: MarketState, psi2: float, scenario: Scenario):
    """Derivative of the put value in z with F tied to z through the kernel."""
    z, j, dj = _put_parts(state, psi2, scenario, derivative=True)
    return _out((dj - j / z) / z)


def put_replication_pi_B(state: MarketState, psi2: float, scenario: Scenario):
    """Risky-asset fraction of the put-replicating portfolio."""
    z, j, dj = _put_parts(state, psi2, scenario, derivative=True)
    if np.any(j <= 0):
        raise UndefinedStrategyError("put value is zero; replication fraction undefined")
    if scenario.illiquid.deterministic:
        return _out(np.zeros_like(j))
    return _out(scenario.gamma * (1.0 - z * dj / j) / scenario.market.sigma)
