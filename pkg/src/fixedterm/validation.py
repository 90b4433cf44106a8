"""Self-check suite: Monte-Carlo gates, budget residuals and derivative cross-checks."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .market import MarketState, Scenario, make_rng
from .oracle import mc_policy_check, mc_put_price, mc_xi, xi_zscore
from .policy import PolicySolution, solve_policy
from .bound import put_price_x_B
from .uoc import consumption_budget, uoc_wealth, uoc_wealth_dz
from .uow import auxiliary_budget, solve_uow, uow_wealth, uow_wealth_dz, v2_min
from .xi import XiArgs, xi, xi_dz

BUDGET_RTOL = 1e-8
FD_RTOL = 1e-5
CONTINUITY_RTOL = 1e-4


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seed: int | None = None


def perturb_multipliers(solution: PolicySolution, factor: float) -> PolicySolution:
    """Copy of ``solution`` with both multipliers scaled (used to test the gates)."""
    uoc, uow = solution.uoc, solution.uow
    if uoc.lambda1 is not None:
        uoc = dataclasses.replace(uoc, lambda1=uoc.lambda1 * factor)
    if uow.lambda2 is not None:
        uow = dataclasses.replace(uow, lambda2=uow.lambda2 * factor)
    return dataclasses.replace(solution, uoc=uoc, uow=uow)


def random_xi_args(rng: np.random.Generator, gamma: float, r: float) -> XiArgs:
    s = rng.uniform(0.1, 3.0)
    t = rng.uniform(0.0, s * 0.95)
    a, b = np.sort(np.exp(rng.uniform(math.log(0.05), math.log(20.0), size=2)))
    return XiArgs(s=s, t=t, z=float(np.exp(rng.uniform(-0.5, 0.5))), k=rng.uniform(-3.0, 3.0),
                  a=float(a), b=float(b), gamma=gamma, r=r)


def _central(fn, x: float, rel: float = 1e-6) -> float:
    h = rel * x
    return (fn(x + h) - fn(x - h)) / (2.0 * h)


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def check_xi_oracle(sc: Scenario, seed: int, draws: int = 5, n: int = 200_000) -> CheckResult:
    rng = make_rng(seed)
    worst = 0.0
    for i in range(draws):
        args = random_xi_args(rng, sc.gamma, sc.market.r)
        worst = max(worst, xi_zscore(args, mc_xi(args, n, seed + i)))
    return CheckResult("mc_xi", worst <= 4.0, f"max |z| = {worst:.3g} over {draws} draws", seed)


def check_put_oracle(sc: Scenario, seed: int, n: int = 200_000) -> CheckResult:
    notes, ok = [], True
    exact = put_price_x_B(0.0, sc)
    ok &= abs(exact - sc.constraints.v_floor * math.exp(-sc.market.r * sc.horizon_T)) <= 1e-12 * exact
    for frac in (0.2, 0.4):
        psi = frac * sc.v0 / sc.illiquid.f0
        rep = mc_put_price(psi, sc, n, seed)
        zs = abs(put_price_x_B(psi, sc) - rep.estimate) / rep.std_error if rep.std_error > 0 else 0.0
        ok &= zs <= 4.0
        notes.append(f"psi={psi:.6g} |z|={zs:.3g}")
    return CheckResult("mc_put_price", bool(ok), "; ".join(notes), seed)


def check_budgets(sol: PolicySolution, sc: Scenario) -> CheckResult:
    r1 = r2 = 0.0
    if sol.uoc.lambda1 is not None:
        r1 = _rel(consumption_budget(sol.uoc.lambda1, sc), sol.split.v1_star)
    if sol.uow.lambda2 is not None:
        r2 = _rel(auxiliary_budget(sol.uow.lambda2, sol.uow.psi2_star, sc), sol.uow.x_tilde2)
    worst = max(r1, r2)
    return CheckResult("budget_residuals", worst <= BUDGET_RTOL,
                       f"consumption {r1:.3g}, terminal {r2:.3g}")


def check_policy_oracle(sol: PolicySolution, sc: Scenario, seed: int) -> CheckResult:
    num = sc.numerics
    chk = mc_policy_check(sol, sc, num.mc_paths, num.mc_steps, seed)
    zu = (chk.utility.estimate - chk.total_value) / chk.utility.std_error
    zb = (chk.budget.estimate - chk.v0) / chk.budget.std_error
    return CheckResult("mc_policy", chk.passed,
                       f"violations {chk.violations}, utility z={zu:.3g}, budget z={zb:.3g}, "
                       f"hedge rms {chk.rms_hedge_error:.4g}", seed)


def check_derivatives(sol: PolicySolution, sc: Scenario, seed: int, n_states: int = 10) -> CheckResult:
    rng = make_rng(seed)
    T, g, r = sc.horizon_T, sc.gamma, sc.market.r
    worst = 0.0
    for _ in range(n_states):
        args = random_xi_args(rng, g, r)
        worst = max(worst, _rel(xi_dz(args), _central(lambda z: xi(dataclasses.replace(args, z=z)), args.z)))
        t = rng.uniform(0.05, 0.9) * T
        z = float(np.exp(rng.uniform(-0.4, 0.4)))
        if sol.uoc.lambda1 is not None:
            lam = sol.uoc.lambda1
            worst = max(worst, _rel(uoc_wealth_dz(t, z, lam, sc),
                                    _central(lambda v: uoc_wealth(t, v, lam, sc), z)))
        f = sc.illiquid.f0 * math.exp(rng.uniform(-0.3, 0.3))
        # F moves with z along the kernel: f z^kappa is held fixed
        def x2(v):
            return uow_wealth(MarketState(t, v, f * (z / v) ** sc.kappa), sol.uow, sc)
        worst = max(worst, _rel(uow_wealth_dz(MarketState(t, z, f), sol.uow, sc), _central(x2, z)))
    return CheckResult("derivatives", worst <= FD_RTOL, f"max rel err {worst:.3g}", seed)


def check_case_boundary(sc: Scenario) -> CheckResult:
    """Conditional value and wealth on both sides of the degenerate-discriminant volatility."""
    p2 = sc.prefs.p2
    sig_b = sc.gamma / (1.0 - p2)
    eps = 1e-7 * sig_b
    v2 = v2_min(sc.constraints, sc.market, sc.horizon_T) + 0.1 * sc.v0
    psi = 0.3 * sc.v0 / sc.illiquid.f0
    sols = [solve_uow(psi, v2, sc.with_param("sigma_f", s)) for s in (sig_b - eps, sig_b, sig_b + eps)]
    scs = [sc.with_param("sigma_f", s) for s in (sig_b - eps, sig_b, sig_b + eps)]
    state = MarketState(0.5 * sc.horizon_T, 1.0, sc.illiquid.f0)
    vals = [s.value for s in sols]
    wealth = [uow_wealth(state, s, c) for s, c in zip(sols, scs)]
    worst = max(_rel(vals[0], vals[1]), _rel(vals[2], vals[1]), _rel(wealth[0], wealth[1]), _rel(wealth[2], wealth[1]))
    return CheckResult("case_boundary", worst <= CONTINUITY_RTOL, f"max rel jump {worst:.3g}")


def run_validation(sc: Scenario, seed: int | None = None, perturb: float | None = None) -> list[CheckResult]:
    seed = sc.numerics.seed if seed is None else seed
    sol = solve_policy(sc)
    if perturb is not None:
        sol = perturb_multipliers(sol, perturb)
    return [
        check_xi_oracle(sc, seed),
        check_put_oracle(sc, seed + 1),
        check_budgets(sol, sc),
        check_policy_oracle(sol, sc, seed + 2),
        check_derivatives(sol, sc, seed + 3),
        check_case_boundary(sc),
    ]
