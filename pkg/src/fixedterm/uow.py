"""Optimal terminal wealth with a guarantee floor and a fixed-term asset position.

Terminal wealth is ``max(V_floor, psi F(T), (lam Z(T))^(1/(p2-1)))``. With F
tied to the kernel, ``psi F(T) = A Z(T)^-kappa``, so each of the three terms
is the maximum on an interval of kernel values; the sign of the discriminant
``D = 1 + sigma_f (p2 - 1) / gamma`` fixes how those intervals are ordered.
Every price and value below is a sum of truncated moments over these
intervals. The liquid wealth splits into the put replicating the floor
shortfall and an auxiliary claim paying the excess of unconstrained wealth.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .bound import (floor_crossing, free_capital, put_value_X_B, put_value_dz, state_asset_scale,
                    terminal_asset_scale)
from .errors import InfeasibleCapitalError, NoFreeCapital, NumericalError, UndefinedStrategyError
from .market import Attractiveness, Constraints, MarketSpec, MarketState, Scenario, classify_nonredundancy
from .roots import bisect_last_true, golden_section_max
from .uoc import BoundaryFlag
from .xi import truncated_moment, truncated_moment_dz

CASE_II_TOL = 1e-12


class CaseTag(enum.Enum):
    CASE_I = "CaseI"
    CASE_II = "CaseII"
    CASE_III = "CaseIII"
    PSI_ZERO = "PsiZero"
    DETERMINISTIC_F = "DeterministicF"


@dataclass(frozen=True)
class UoWSolution:
    v2: float
    psi2_star: float
    lambda2: float | None  # None when no capital is left after replicating the floor
    x_b: float
    x_tilde2: float
    value: float
    case_tag: CaseTag
    boundary_flag: BoundaryFlag


def v2_min(constraints: Constraints, market: MarketSpec, T: float) -> float:
    return math.exp(-market.r * T) * constraints.v_floor


def case_discriminant(gamma: float, sigma_f: float, p2: float) -> float:
    return 1.0 + sigma_f * (p2 - 1.0) / gamma


def case_tag(psi2: float, scenario: Scenario) -> CaseTag:
    if scenario.illiquid.deterministic:
        return CaseTag.DETERMINISTIC_F
    if psi2 <= 0:
        return CaseTag.PSI_ZERO
    D = case_discriminant(scenario.gamma, scenario.illiquid.sigma_f, scenario.prefs.p2)
    if abs(D) <= CASE_II_TOL:
        return CaseTag.CASE_II
    return CaseTag.CASE_I if D > 0 else CaseTag.CASE_III


def _uow_args(scenario: Scenario):
    return (scenario.constraints.v_floor, scenario.prefs.p2, scenario.kappa,
            scenario.horizon_T, scenario.gamma, scenario.market.r)


def auxiliary_budget(lambda2: float, psi2: float, scenario: Scenario) -> float:
    """Time-0 cost of the auxiliary claim for multiplier ``lambda2``."""
    vf, p2, kappa, T, g, r = _uow_args(scenario)
    return kernels.impl.aux_budget(lambda2, terminal_asset_scale(psi2, scenario), vf, p2, kappa, T, g, r)


def solve_lambda2(x_tilde2: float, psi2: float, scenario: Scenario, tol: float | None = None) -> float:
    """Multiplier whose auxiliary claim costs exactly ``x_tilde2``."""
    if not x_tilde2 > 0:
        raise NoFreeCapital("no capital left after replicating the floor; terminal wealth is pure replication")
    vf, p2, kappa, T, g, r = _uow_args(scenario)
    lam = kernels.impl.aux_lambda(x_tilde2, terminal_asset_scale(psi2, scenario), vf, p2, kappa, T, g, r,
                                  tol or scenario.numerics.bisect_tol)
    if not math.isfinite(lam) or lam <= 0:
        raise NumericalError(f"wealth multiplier not bracketed for x_tilde2={x_tilde2!r}")
    return lam


def _conditional(psi2: float, v2: float, scenario: Scenario, tol: float | None = None):
    """(value, lambda2 or None, x_b, x_tilde2) for a fixed asset position."""
    vf, p2, kappa, T, g, r = _uow_args(scenario)
    A = terminal_asset_scale(psi2, scenario)
    xb = kernels.impl.put_price(A, vf, kappa, T, g, r)
    xt = free_capital(psi2, v2, scenario)
    if xt < -1e-10 * max(v2, 1.0):
        raise InfeasibleCapitalError(
            f"position psi2={psi2:.12g} needs {psi2 * scenario.illiquid.f0 + xb:.12g} > v2={v2:.12g}",
            required=psi2 * scenario.illiquid.f0 + xb)
    if xt <= 0:
        return kernels.impl.aux_value(math.inf, A, vf, p2, kappa, T, g, r), None, xb, 0.0
    lam = kernels.impl.aux_lambda(xt, A, vf, p2, kappa, T, g, r, tol or scenario.numerics.bisect_tol)
    if not math.isfinite(lam) or lam <= 0:
        raise NumericalError(f"wealth multiplier not bracketed for x_tilde2={xt!r}")
    return kernels.impl.aux_value(lam, A, vf, p2, kappa, T, g, r), lam, xb, xt


def conditional_value(psi2: float, v2: float, scenario: Scenario) -> float:
    """Optimal expected terminal utility given the asset position ``psi2``."""
    return _conditional(psi2, v2, scenario)[0]


def replication_value(psi2: float, scenario: Scenario) -> float:
    """Expected utility of ``max(V_floor, psi2 F(T))`` (no free capital)."""
    vf, p2, kappa, T, g, r = _uow_args(scenario)
    return kernels.impl.aux_value(math.inf, terminal_asset_scale(psi2, scenario), vf, p2, kappa, T, g, r)


def feasible_psi_max(v2: float, scenario: Scenario) -> float:
    """Largest affordable position: floor put plus asset cost within ``v2``."""
    f0 = scenario.illiquid.f0
    vmin = v2_min(scenario.constraints, scenario.market, scenario.horizon_T)
    attract = classify_nonredundancy(scenario.market, scenario.illiquid)
    if v2 <= vmin and attract is not Attractiveness.STRICTLY_ATTRACTIVE:
        # any position costs strictly more than the floor's bond price
        return 0.0
    return bisect_last_true(lambda psi: free_capital(psi, v2, scenario) >= 0.0, 0.0, v2 / f0, rel_tol=1e-13)


def _boundary_solution(v2: float, scenario: Scenario) -> UoWSolution:
    vf, p2 = scenario.constraints.v_floor, scenario.prefs.p2
    return UoWSolution(v2, 0.0, None, v2_min(scenario.constraints, scenario.market, scenario.horizon_T),
                       0.0, vf ** p2 / p2, case_tag(0.0, scenario), BoundaryFlag.AT_MINIMUM)


def solve_uow(psi2: float, v2: float, scenario: Scenario, tol: float | None = None) -> UoWSolution:
    """Assemble the solution for a given position (no optimisation over psi)."""
    value, lam, xb, xt = _conditional(psi2, v2, scenario, tol)
    return UoWSolution(v2, psi2, lam, xb, xt, value, case_tag(psi2, scenario), BoundaryFlag.INTERIOR)


def fixed_position(psi2: float, v2: float, scenario: Scenario, tol: float | None = None) -> UoWSolution:
    """Solution with the asset position held at ``psi2`` (the floor boundary included)."""
    vmin = v2_min(scenario.constraints, scenario.market, scenario.horizon_T)
    if psi2 == 0.0 and v2 <= vmin:
        if v2 < vmin * (1.0 - 1e-14):
            raise InfeasibleCapitalError(
                f"wealth capital {v2:.12g} is below the guarantee cost {vmin:.12g}", required=vmin)
        return _boundary_solution(v2, scenario)
    return solve_uow(psi2, v2, scenario, tol)


def optimize_psi2(v2: float, scenario: Scenario, tol: float | None = None) -> UoWSolution:
    """Maximise the conditional value over affordable positions.

    Coarse grid, then golden-section refinement around the best grid point.
    Positions are only taken when F beats the liquid market.
    """
    vmin = v2_min(scenario.constraints, scenario.market, scenario.horizon_T)
    if v2 < vmin * (1.0 - 1e-14):
        raise InfeasibleCapitalError(
            f"wealth capital {v2:.12g} is below the guarantee cost {vmin:.12g}", required=vmin)
    attract = classify_nonredundancy(scenario.market, scenario.illiquid)
    if attract is not Attractiveness.STRICTLY_ATTRACTIVE:
        return fixed_position(0.0, v2, scenario, tol)
    # an attractive asset lowers the cost of the floor, so positions stay
    # affordable even at the floor's bond price

    psi_hi = feasible_psi_max(v2, scenario)
    grid = np.linspace(0.0, psi_hi, scenario.numerics.psi_grid)
    cache: dict[float, float] = {}

    def value(psi: float) -> float:
        if psi not in cache:
            cache[psi] = _conditional(psi, v2, scenario, tol)[0]
        return cache[psi]

    vals = np.array([value(float(p)) for p in grid])
    i = int(np.argmax(vals))
    best_psi, best_val = float(grid[i]), float(vals[i])
    if len(grid) > 1:
        lo, hi = float(grid[max(i - 1, 0)]), float(grid[min(i + 1, len(grid) - 1)])
        psi, val = golden_section_max(value, lo, hi, tol=1e-8 * v2 / scenario.illiquid.f0)
        if val > best_val:
            best_psi, best_val = psi, val
    return solve_uow(best_psi, v2, scenario, tol)


def _regions(lam, A, scenario: Scenario):
    """Per-element kernel intervals (see the scalar kernel for the layout)."""
    vf, p2, kappa = scenario.constraints.v_floor, scenario.prefs.p2, scenario.kappa
    A = np.atleast_1d(np.asarray(A, float))
    out = np.array([kernels.impl.uow_regions(lam, a, vf, p2, kappa) for a in A.ravel()])
    return [out[:, i].reshape(A.shape) for i in range(6)]


def _aux_parts(state: MarketState, solution: UoWSolution, scenario: Scenario, derivative: bool):
    vf, p2, kappa, T, g, r = _uow_args(scenario)
    t, z, f = np.broadcast_arrays(*(np.atleast_1d(np.asarray(v, float)) for v in (state.t, state.z, state.f)))
    lam = solution.lambda2
    if lam is None:
        zero = np.zeros_like(z)
        return z, zero, zero
    A = state_asset_scale(t, z, f, solution.psi2_star, scenario)
    zvf, _, _, _, i_lo, i_hi = _regions(lam, A, scenario)
    kI = p2 / (p2 - 1.0)
    cI = math.exp(math.log(lam) / (p2 - 1.0))
    terms = ((cI, kI, i_lo, i_hi), (-vf, 1.0, np.maximum(i_lo, zvf), i_hi),
             (-A, 1.0 - kappa, i_lo, np.minimum(i_hi, zvf)))
    j = sum(c * truncated_moment(T, t, z, k, a, b, g, r) for c, k, a, b in terms)
    if not derivative:
        return z, j, None
    dj = sum(c * truncated_moment_dz(T, t, z, k, a, b, g, r) for c, k, a, b in terms)
    return z, j, dj


def _shape_like(state: MarketState, x):
    shape = np.broadcast(np.asarray(state.t), np.asarray(state.z), np.asarray(state.f)).shape
    x = np.asarray(x).reshape(shape)
    return x if x.ndim else float(x)


def auxiliary_wealth(state: MarketState, solution: UoWSolution, scenario: Scenario):
    """Value at ``state`` of the claim paying unconstrained wealth above the floor."""
    z, j, _ = _aux_parts(state, solution, scenario, derivative=False)
    return _shape_like(state, j / z)


def uow_wealth(state: MarketState, solution: UoWSolution, scenario: Scenario):
    """Liquid wealth of the terminal-wealth subproblem: floor put plus auxiliary claim."""
    return _shape_like(state, np.asarray(put_value_X_B(state, solution.psi2_star, scenario))
                       + np.asarray(auxiliary_wealth(state, solution, scenario)))


def uow_wealth_dz(state: MarketState, solution: UoWSolution, scenario: Scenario):
    z, j, dj = _aux_parts(state, solution, scenario, derivative=True)
    aux = (dj - j / z) / z
    return _shape_like(state, np.asarray(put_value_dz(state, solution.psi2_star, scenario)).ravel() + aux.ravel())


def auxiliary_strategy(state: MarketState, solution: UoWSolution, scenario: Scenario):
    z, j, dj = _aux_parts(state, solution, scenario, derivative=True)
    if np.any(j <= 0):
        raise UndefinedStrategyError("auxiliary wealth is zero")
    return _shape_like(state, scenario.gamma * (1.0 - z * dj / j) / scenario.market.sigma)


def uow_strategy(state: MarketState, solution: UoWSolution, scenario: Scenario):
    """Risky-asset fraction of the terminal-wealth subproblem's liquid wealth."""
    if np.any(np.asarray(state.t) >= scenario.horizon_T):
        raise UndefinedStrategyError("strategy undefined at the horizon")
    x = np.atleast_1d(np.asarray(uow_wealth(state, solution, scenario), float)).ravel()
    if np.any(x <= 0):
        raise UndefinedStrategyError("terminal-wealth subproblem holds no liquid wealth")
    dx = np.atleast_1d(np.asarray(uow_wealth_dz(state, solution, scenario), float)).ravel()
    z = np.broadcast_to(np.asarray(state.z, float), np.broadcast(np.asarray(state.t), np.asarray(state.z),
                                                                   np.asarray(state.f)).shape).ravel()
    return _shape_like(state, -scenario.gamma * z * dx / (scenario.market.sigma * x))


def unconstrained_terminal(z_T, lambda2: float | None, p2: float):
    if lambda2 is None:
        return np.zeros_like(np.asarray(z_T, float))
    return np.exp(np.log(lambda2 * np.asarray(z_T, float)) / (p2 - 1.0))


def terminal_wealth_V2(z_T, f_T, solution: UoWSolution, scenario: Scenario):
    """Optimal terminal wealth including the asset payoff."""
    out = np.maximum(np.maximum(scenario.constraints.v_floor, solution.psi2_star * np.asarray(f_T, float)),
                     unconstrained_terminal(z_T, solution.lambda2, scenario.prefs.p2))
    return out if np.ndim(out) else float(out)
