"""Monte-Carlo cross-checks for the closed-form prices, values and policies.

Every estimator samples the kernel exactly (it is lognormal), pairs each
Gaussian draw with its negative, and reports the standard error of the pair
means. Sums are accumulated per chunk with numpy's pairwise summation and
combined with ``math.fsum`` so a fixed seed gives identical output.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from . import _kernels_py
from .errors import InvalidArgumentError
from .market import MarketState, Scenario, make_rng
from .policy import PolicySolution, evaluate_policy
from .uoc import optimal_consumption
from .uow import terminal_wealth_V2
from .xi import XiArgs, gauss_legendre, xi

CHUNK_PAIRS = 1 << 17
HEDGE_PATHS = 256
_SLACK = 1e-12


@dataclass(frozen=True)
class McReport:
    estimate: float
    std_error: float
    n_samples: int
    seed: int
    violations: int = 0
    rms_hedge_error: float = 0.0

    def __post_init__(self):
        if self.std_error < 0 or self.violations > self.n_samples:
            raise InvalidArgumentError("inconsistent Monte-Carlo report")

    def within(self, target: float, n_se: float = 4.0) -> bool:
        return abs(self.estimate - target) <= n_se * self.std_error


@dataclass(frozen=True)
class PolicyCheck:
    """End-to-end check of a solved policy along simulated paths."""

    utility: McReport
    budget: McReport
    total_value: float
    v0: float
    violations: int
    rms_hedge_error: float
    hedge_paths: int

    @property
    def utility_ok(self) -> bool:
        return self.utility.within(self.total_value)

    @property
    def budget_ok(self) -> bool:
        return self.budget.within(self.v0)

    @property
    def passed(self) -> bool:
        return self.violations == 0 and self.utility_ok and self.budget_ok


class _PairStats:
    """Running mean and variance of antithetic pair means."""

    def __init__(self):
        self.sums: list[float] = []
        self.sq: list[float] = []
        self.n = 0

    def add(self, pair_means: np.ndarray):
        self.sums.append(float(np.sum(pair_means)))
        self.sq.append(float(np.sum(pair_means * pair_means)))
        self.n += pair_means.size

    def add_centered(self, pair_means: np.ndarray, shift: float):
        # accumulate around a shift to avoid cancellation in the variance
        self.add(pair_means - shift)

    def result(self, shift: float = 0.0) -> tuple[float, float]:
        n = self.n
        mean = math.fsum(self.sums) / n
        if n < 2:
            return mean + shift, 0.0
        var = max(math.fsum(self.sq) / n - mean * mean, 0.0) * n / (n - 1)
        return mean + shift, math.sqrt(var / n)


def _pair_counts(n: int, chunk: int = CHUNK_PAIRS) -> list[int]:
    pairs = n // 2
    if pairs < 1:
        raise InvalidArgumentError("need at least two samples for antithetic pairs")
    return [min(chunk, pairs - i) for i in range(0, pairs, chunk)]


def mc_xi(args: XiArgs, n: int, seed: int) -> McReport:
    """Estimate ``E[Z(s)^k 1{a < Z(s) < b} | Z(t) = z]`` by exact lognormal sampling."""
    tau = float(args.s) - float(args.t)
    if not tau > 0:
        raise InvalidArgumentError("mc_xi requires t < s")
    g, r = float(args.gamma), float(args.r)
    z, k, a, b = float(args.z), float(args.k), float(args.a), float(args.b)
    rng = make_rng(seed)
    drift = math.log(z) - (r + 0.5 * g * g) * tau
    vol = g * math.sqrt(tau)
    stats = _PairStats()
    for m in _pair_counts(n):
        eps = rng.standard_normal(m)
        pair = 0.0
        for sign in (1.0, -1.0):
            lz = drift - sign * vol * eps
            zs = np.exp(lz)
            pair = pair + np.where((zs > a) & (zs < b), np.exp(k * lz), 0.0)
        stats.add(0.5 * pair)
    est, se = stats.result()
    return McReport(est, se, 2 * stats.n, int(seed))


def xi_zscore(args: XiArgs, report: McReport) -> float:
    """Standardised gap between ``xi(args)`` and a ``mc_xi`` estimate.

    A zero estimate means no sample landed in (a, b); it is scored by the
    normal quantile of the probability of that event given the exact hit
    probability.
    """
    exact = xi(args)
    if report.std_error > 0:
        return abs(exact - report.estimate) / report.std_error
    if report.estimate == exact:
        return 0.0
    if report.estimate == 0.0:
        p_hit = xi(XiArgs(args.s, args.t, args.z, 0.0, args.a, args.b, args.gamma, args.r))
        return float(norm.isf(0.5 * math.exp(-report.n_samples * p_hit)))
    return math.inf


def mc_put_price(psi2: float, scenario: Scenario, n: int, seed: int) -> McReport:
    """Estimate ``E[Z(T) (V_floor - psi2 F(T))^+]`` with Z(T) as control variate."""
    if psi2 < 0:
        raise InvalidArgumentError(f"psi2 must be non-negative, got {psi2!r}")
    T, r, g = scenario.horizon_T, scenario.market.r, scenario.gamma
    ill, vf = scenario.illiquid, scenario.constraints.v_floor
    disc = math.exp(-r * T)
    pairs = sum(_pair_counts(n))
    if psi2 == 0 or ill.sigma_f == 0:
        # payoff is a constant multiple of Z(T)
        payoff = max(vf - psi2 * ill.f0 * math.exp(ill.mu_f * T), 0.0)
        return McReport(payoff * disc, 0.0, 2 * pairs, int(seed))
    rng = make_rng(seed)
    sq = math.sqrt(T)
    lz0 = -(r + 0.5 * g * g) * T
    lf0 = math.log(ill.f0) + (ill.mu_f - 0.5 * ill.sigma_f ** 2) * T
    ys, cs = [], []
    for m in _pair_counts(n):
        w = rng.standard_normal(m) * sq
        y = c = 0.0
        for sign in (1.0, -1.0):
            zt = np.exp(lz0 - g * sign * w)
            ft = np.exp(lf0 + ill.sigma_f * sign * w)
            y = y + zt * np.maximum(vf - psi2 * ft, 0.0)
            c = c + zt
        ys.append(0.5 * y)
        cs.append(0.5 * c)
    y = np.concatenate(ys)
    c = np.concatenate(cs)
    cc = c - disc
    var_c = float(np.dot(cc, cc))
    beta = float(np.dot(y - y.mean(), cc)) / var_c if var_c > 0 else 0.0
    adj = y - beta * cc
    stats = _PairStats()
    stats.add(adj)
    est, se = stats.result()
    return McReport(est, se, 2 * pairs, int(seed))


def _time_nodes(T: float, cuts, n: int):
    """Gauss-Legendre nodes in sqrt(t) on panels split at ``cuts``."""
    x, w = gauss_legendre(n)
    edges = _kernels_py._panel_edges(T, cuts)
    ts, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi <= lo:
            continue
        s = 0.5 * (hi + lo) + 0.5 * (hi - lo) * x
        ts.append(s * s)
        ws.append(0.5 * (hi - lo) * w * 2.0 * s)
    t = np.concatenate(ts)
    order = np.argsort(t)
    return t[order], np.concatenate(ws)[order]


def _consumption_cuts(solution: PolicySolution, scenario: Scenario):
    lam = solution.uoc.lambda1
    if lam is None:
        return ()
    p1, cf = scenario.prefs.p1, scenario.constraints.c_floor
    g, r = scenario.gamma, scenario.market.r
    zc = math.exp((p1 - 1.0) * math.log(cf) - math.log(lam))
    return tuple(_kernels_py._crossing(k, zc, g, r) for k in (p1 / (p1 - 1.0), 1.0, 0.0))


def _utility(x, p):
    return np.exp(p * np.log(x)) / p


def _hedge_error(solution: PolicySolution, scenario: Scenario, n_paths: int, n_steps: int,
                 rng: np.random.Generator) -> float:
    """RMS gap between a discretely rebalanced liquid portfolio and its closed-form target."""
    T, r = scenario.horizon_T, scenario.market.r
    mu, sigma, g = scenario.market.mu, scenario.market.sigma, scenario.gamma
    ill = scenario.illiquid
    dt = T / n_steps
    psi = solution.psi_star
    x = np.full(n_paths, scenario.v0 - psi * ill.f0)
    w = np.zeros(n_paths)
    for i in range(n_steps):
        t = i * dt
        z = np.exp(-(r + 0.5 * g * g) * t - g * w)
        f = ill.f0 * np.exp((ill.mu_f - 0.5 * ill.sigma_f ** 2) * t + ill.sigma_f * w)
        ev = evaluate_policy(MarketState(t, z, f), solution, scenario)
        dw = rng.standard_normal(n_paths) * math.sqrt(dt)
        growth = np.exp((mu - 0.5 * sigma * sigma) * dt + sigma * dw)
        risky = ev.pi_fraction * x
        x = (x - risky - ev.c_rate * dt) * math.exp(r * dt) + risky * growth
        w = w + dw
    zt = np.exp(-(r + 0.5 * g * g) * T - g * w)
    ft = ill.f0 * np.exp((ill.mu_f - 0.5 * ill.sigma_f ** 2) * T + ill.sigma_f * w)
    target = np.asarray(terminal_wealth_V2(zt, ft, solution.uow, scenario)) - psi * ft
    return float(np.sqrt(np.mean((x - target) ** 2)))


def mc_policy_check(solution: PolicySolution, scenario: Scenario, n_paths: int, n_steps: int,
                    seed: int, hedge_paths: int = HEDGE_PATHS) -> PolicyCheck:
    """Simulate the closed-form policy and compare utility and budget with the solution.

    Consumption is sampled at the same time quadrature the closed forms use;
    ``n_steps`` sets the rebalancing grid of the hedge-error check, run on the
    first ``hedge_paths`` paths' worth of fresh draws.
    """
    T, r, g = scenario.horizon_T, scenario.market.r, scenario.gamma
    ill, cons, prefs = scenario.illiquid, scenario.constraints, scenario.prefs
    psi = solution.psi_star
    t_nodes, w_nodes = _time_nodes(T, _consumption_cuts(solution, scenario), scenario.numerics.quad_nodes)
    grid = np.append(t_nodes, T)
    steps = np.sqrt(np.diff(np.concatenate(([0.0], grid))))
    rng = make_rng(seed)
    ustats, bstats = _PairStats(), _PairStats()
    violations = 0
    lam1 = solution.uoc.lambda1
    shift_u, shift_b = solution.total_value, scenario.v0
    for m in _pair_counts(n_paths, max(1, (1 << 20) // grid.size)):
        dw = rng.standard_normal((m, grid.size)) * steps
        u_pair = b_pair = 0.0
        for sign in (1.0, -1.0):
            w = np.cumsum(sign * dw, axis=1)
            z = np.exp(-(r + 0.5 * g * g) * grid - g * w)
            c = np.asarray(optimal_consumption(grid[:-1], z[:, :-1], lam1, prefs, cons.c_floor))
            zt = z[:, -1]
            ft = ill.f0 * np.exp((ill.mu_f - 0.5 * ill.sigma_f ** 2) * T + ill.sigma_f * w[:, -1])
            vt = np.asarray(terminal_wealth_V2(zt, ft, solution.uow, scenario))
            violations += int(np.count_nonzero(np.any(c < cons.c_floor * (1.0 - _SLACK), axis=1)
                                               | (vt < cons.v_floor * (1.0 - _SLACK))))
            u_pair = u_pair + _utility(c, prefs.p1) @ w_nodes + _utility(vt, prefs.p2)
            b_pair = b_pair + (z[:, :-1] * c) @ w_nodes + zt * (vt - psi * ft) + psi * ill.f0
        ustats.add_centered(0.5 * u_pair, shift_u)
        bstats.add_centered(0.5 * b_pair, shift_b)
    u_est, u_se = ustats.result(shift_u)
    b_est, b_se = bstats.result(shift_b)
    n = 2 * ustats.n
    rms = _hedge_error(solution, scenario, hedge_paths, n_steps or scenario.numerics.mc_steps,
                       make_rng(int(seed) + 1)) if hedge_paths > 0 else 0.0
    return PolicyCheck(
        utility=McReport(u_est, u_se, n, int(seed), violations, rms),
        budget=McReport(b_est, b_se, n, int(seed), violations, rms),
        total_value=solution.total_value, v0=scenario.v0,
        violations=violations, rms_hedge_error=rms, hedge_paths=hedge_paths,
    )
