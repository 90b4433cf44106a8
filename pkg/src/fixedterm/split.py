"""Division of initial capital between the consumption and terminal-wealth subproblems."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .errors import InfeasibleCapitalError, InvalidArgumentError, NumericalError
from .market import Scenario
from .roots import find_root, golden_section_max
from .uoc import UoCSolution, solve_uoc, v1_min
from .uow import UoWSolution, fixed_position, optimize_psi2, v2_min


@dataclass(frozen=True)
class SplitResult:
    v1_star: float
    v2_star: float
    vbar1: float  # unprojected first-order root (the bracket end when no interior root exists)
    projected: bool


def v0_min(scenario: Scenario) -> float:
    T = scenario.horizon_T
    return v1_min(scenario.constraints, scenario.market, T) + v2_min(scenario.constraints, scenario.market, T)


def value_derivative(fn: Callable[[float], float], v: float, h: float, lower: float | None = None,
                     richardson: bool = False) -> float:
    """Central difference of ``fn`` at ``v``.

    If ``v - h`` falls below ``lower`` the step is shrunk once to stay inside.
    """
    if lower is not None and v - h < lower:
        h = 0.5 * (v - lower)
        if not h > 0:
            raise InvalidArgumentError(f"no room for a central difference at v={v!r}")

    def cd(step: float) -> float:
        return (fn(v + step) - fn(v - step)) / (2.0 * step)

    d1 = cd(h)
    if not richardson:
        return d1
    return (4.0 * cd(0.5 * h) - d1) / 3.0


class _Subproblems:
    """Memoised subproblem solves at a fixed scenario."""

    def __init__(self, scenario: Scenario, allow_position: bool):
        self.scenario = scenario
        self.allow_position = allow_position
        self._uoc: dict[float, UoCSolution] = {}
        self._uow: dict[float, UoWSolution] = {}
        self.tol = min(scenario.numerics.bisect_tol, 1e-11)

    def uoc(self, v1: float) -> UoCSolution:
        if v1 not in self._uoc:
            self._uoc[v1] = solve_uoc(v1, self.scenario, self.tol)
        return self._uoc[v1]

    def uow(self, v2: float) -> UoWSolution:
        if v2 not in self._uow:
            if self.allow_position:
                self._uow[v2] = optimize_psi2(v2, self.scenario, self.tol)
            else:
                self._uow[v2] = fixed_position(0.0, v2, self.scenario, self.tol)
        return self._uow[v2]


def _log_multiplier(lam: float | None) -> float:
    return math.inf if lam is None else math.log(lam)


def split_capital(scenario: Scenario, allow_position: bool = True):
    """Solve the split and return ``(SplitResult, UoCSolution, UoWSolution)``."""
    v0 = scenario.v0
    T = scenario.horizon_T
    lo_b = v1_min(scenario.constraints, scenario.market, T)
    hi_b = v0 - v2_min(scenario.constraints, scenario.market, T)
    vmin = lo_b + v0 - hi_b
    if v0 < vmin * (1.0 - 1e-14):
        raise InfeasibleCapitalError(
            f"initial capital {v0:.12g} is below the minimum {vmin:.12g}", required=vmin)
    sub = _Subproblems(scenario, allow_position)
    delta = 1e-10 * v0
    if hi_b - lo_b <= 2.0 * delta:
        v1 = lo_b
        return SplitResult(v1, v0 - v1, v1, True), sub.uoc(v1), sub.uow(v0 - v1)

    if scenario.numerics.split_derivative == "envelope":
        def foc(v1: float) -> float:
            # V1' = lambda1 and V2' = lambda2 by the envelope theorem
            return _log_multiplier(sub.uoc(v1).lambda1) - _log_multiplier(sub.uow(v0 - v1).lambda2)
    else:
        rel = scenario.numerics.fd_rel_step

        def foc(v1: float) -> float:
            v2 = v0 - v1
            d1 = value_derivative(lambda v: sub.uoc(v).value, v1, max(rel * v1, 1e-7 * v0), lower=lo_b)
            d2 = value_derivative(lambda v: sub.uow(v).value, v2, max(rel * v2, 1e-7 * v0), lower=v0 - hi_b)
            return d1 - d2

    lo, hi = lo_b + delta, hi_b - delta
    flo, fhi = foc(lo), foc(hi)
    if flo <= 0:
        v1, vbar, projected = lo_b, lo, True
    elif fhi >= 0:
        v1, vbar, projected = hi_b, hi, True
    else:
        try:
            vbar = find_root(foc, lo, hi, xtol=1e-10 * v0, flo=flo, fhi=fhi)
        except NumericalError:
            # derivative noise: maximise the total value directly
            vbar, _ = golden_section_max(lambda v: sub.uoc(v).value + sub.uow(v0 - v).value,
                                         lo, hi, tol=1e-9 * v0)
        v1, projected = min(max(vbar, lo_b), hi_b), False
    return SplitResult(v1, v0 - v1, vbar, projected), sub.uoc(v1), sub.uow(v0 - v1)


def solve_split(v0: float, scenario: Scenario) -> SplitResult:
    """Optimal capital split of ``v0`` (overrides the scenario's v0)."""
    return split_capital(scenario.with_param("v0", v0))[0]
