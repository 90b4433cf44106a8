"""Acceptance gate: one status line per criterion, tolerances as specified.

Run ``pytest tests/test_acceptance.py -v`` and read the "acceptance criteria"
section at the end of the report.
"""
import dataclasses
import math
import time

import numpy as np
import pytest

from acceptance_log import record
from fixedterm import policy
from fixedterm.bound import put_price_x_B
from fixedterm.market import MarketState, Scenario, make_rng
from fixedterm.oracle import mc_policy_check, mc_put_price, mc_xi, xi_zscore
from fixedterm.policy import geug, osiw, solve_policy, svf
from fixedterm.split import split_capital
from fixedterm.uoc import consumption_budget, solve_lambda1, solve_uoc, uoc_strategy, uoc_wealth, v1_min
from fixedterm.uow import (auxiliary_wealth, conditional_value, feasible_psi_max, optimize_psi2, solve_uow,
                           uow_strategy, uow_wealth, v2_min)
from fixedterm.validation import random_xi_args
from fixedterm.xi import xi, xi_dz

SEED = 20240611
N_MC = 1_000_000

# closed-form minimum capitals at the base case, evaluated once in extended precision
V1_MIN = 8.606881472877182
V2_MIN = 73.11449482169826


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def _central(fn, x, rel=1e-6):
    h = rel * x
    return (fn(x + h) - fn(x - h)) / (2 * h)


# 1. kernel oracle

def test_c1_kernel_oracle():
    base = Scenario()
    rng = make_rng(SEED)
    start = time.perf_counter()
    worst = 0.0
    for i in range(20):
        args = random_xi_args(rng, base.gamma, base.market.r)
        worst = max(worst, xi_zscore(args, mc_xi(args, N_MC, SEED + i)))
    elapsed = time.perf_counter() - start
    ok = record("C1 kernel oracle", worst <= 4.0 and elapsed <= 60.0,
                f"max |xi - mc|/SE = {worst:.3g} over 20 draws at 1e6 (limit 4, 60 s)", elapsed)
    assert ok


# 2. put pricing

def test_c2_put_pricing():
    base = Scenario()
    start = time.perf_counter()
    exact0 = put_price_x_B(0.0, base)
    ok = _rel(exact0, 80.0 * math.exp(-0.09)) <= 1e-12
    notes = [f"psi=0 rel {_rel(exact0, 80.0 * math.exp(-0.09)):.2g}"]
    for frac in (0.0, 0.2, 0.4, 0.6):
        psi = frac * base.v0 / base.illiquid.f0
        rep = mc_put_price(psi, base, N_MC, SEED)
        err = abs(put_price_x_B(psi, base) - rep.estimate)
        z = err / rep.std_error if rep.std_error > 0 else (0.0 if err <= 1e-12 * exact0 else math.inf)
        ok &= z <= 4.0
        notes.append(f"psi={psi:g} z={z:.2f}")
    elapsed = time.perf_counter() - start
    ok &= elapsed <= 30.0
    assert record("C2 put pricing", ok, "; ".join(notes), elapsed)


# 3. budget residuals and minima

def test_c3_budget_residuals():
    base = Scenario()
    policy._solve_cached.cache_clear()
    start = time.perf_counter()
    sol = solve_policy(base)
    r1 = _rel(consumption_budget(sol.uoc.lambda1, base), sol.split.v1_star)
    x0 = auxiliary_wealth(MarketState(0.0, 1.0, base.illiquid.f0), sol.uow, base)
    r2 = _rel(x0, sol.uow.x_tilde2)
    m1 = _rel(v1_min(base.constraints, base.market, base.horizon_T), V1_MIN)
    m2 = _rel(v2_min(base.constraints, base.market, base.horizon_T), V2_MIN)
    ok = r1 <= 1e-8 and r2 <= 1e-8 and m1 <= 1e-10 and m2 <= 1e-10
    ok &= abs(V1_MIN - 8.60688) < 5e-6 and abs(V2_MIN - 73.1145) < 5e-5
    assert record("C3 budget residuals", ok,
                  f"consumption {r1:.2g}, terminal {r2:.2g}, v1min {m1:.2g}, v2min {m2:.2g}",
                  time.perf_counter() - start)


# 4. sensitivity points: (label, metric, parameter, value, lo, hi)

def _band(c, tol):
    return c - tol, c + tol


SENSITIVITY_POINTS = [
    ("4a OSIW(T=1)", "osiw", "T", 1.0, 0.60, 0.73),
    ("4a OSIW(T=4)", "osiw", "T", 4.0, 0.43, 0.57),
    ("4b OSIW(dmu=1.5%)", "osiw", "delta_mu", 0.015, 0.40, 0.50),
    ("4b OSIW(Sharpe equality)", "osiw", "delta_mu", 0.0, 0.0, 1e-6),
    ("4c OSIW(p2=-2)", "osiw", "p2", -2.0, *_band(0.52, 0.04)),
    ("4c OSIW(p2=-1)", "osiw", "p2", -1.0, *_band(0.56, 0.04)),
    ("4d SVF(p1=-2)", "svf", "p1", -2.0, *_band(0.006, 0.0025)),
    ("4d SVF(dmu=1%)", "svf", "delta_mu", 0.01, *_band(0.002, 0.003)),
    ("4d SVF(dmu=4%)", "svf", "delta_mu", 0.04, *_band(0.010, 0.003)),
    ("4d SVF(dsigma=-10%)", "svf", "delta_sigma", -0.10, 0.0, 1e-6),
    ("4e GEUG(p1=-2.5)", "geug", "p1", -2.5, *_band(0.022, 0.005)),
    ("4e GEUG(p2=-0.5)", "geug", "p2", -0.5, *_band(0.09, 0.015)),
    ("4e GEUG(dmu=3%)", "geug", "delta_mu", 0.03, *_band(0.01, 0.004)),
    ("4e GEUG(T=1)", "geug", "T", 1.0, *_band(0.07, 0.015)),
    ("4e GEUG(T=3)", "geug", "T", 3.0, *_band(0.006, 0.004)),
    ("4e GEUG(sigmaF=5%)", "geug", "sigma_f", 0.05, *_band(0.02, 0.005)),
    ("4e GEUG(dsigma=-10%)", "geug", "delta_sigma", -0.10, 0.0, 1e-6),
]


def _sensitivity_metric(metric, sc):
    if metric == "osiw":
        return osiw(solve_policy(sc), sc)
    return svf(sc) if metric == "svf" else geug(sc)


@pytest.mark.parametrize("label,metric,param,value,lo,hi", SENSITIVITY_POINTS, ids=[p[0] for p in SENSITIVITY_POINTS])
def test_c4_sensitivity_point(label, metric, param, value, lo, hi):
    sc = Scenario().with_param(param, value)
    policy._solve_cached.cache_clear()
    start = time.perf_counter()
    got = _sensitivity_metric(metric, sc)
    elapsed = time.perf_counter() - start
    ok = lo <= got <= hi and elapsed <= 5.0
    assert record(f"C{label}", ok, f"{got:.6g} in [{lo:.4g}, {hi:.4g}]", elapsed)


# 5. policy oracle

def test_c5_policy_oracle():
    base = Scenario()
    sol = solve_policy(base)
    start = time.perf_counter()
    chk = mc_policy_check(sol, base, 100_000, base.numerics.mc_steps, SEED)
    zu = (chk.utility.estimate - chk.total_value) / chk.utility.std_error
    zb = (chk.budget.estimate - chk.v0) / chk.budget.std_error
    assert record("C5 policy oracle", chk.passed,
                  f"violations {chk.violations}, utility z={zu:.2f}, budget z={zb:.2f}",
                  time.perf_counter() - start)


# 6. structural properties

def test_c6_structure():
    base = Scenario()
    start = time.perf_counter()
    T = base.horizon_T
    notes, ok = [], True

    worst = -math.inf
    for v2 in (V2_MIN, 80.0, 95.0):
        ps = np.linspace(0.0, feasible_psi_max(v2, base), 33)
        vals = np.array([conditional_value(p, v2, base) for p in ps])
        worst = max(worst, float(np.max(np.diff(vals, 2) / np.abs(vals[1:-1]))))
    ok &= worst <= 1e-9
    notes.append(f"psi concavity max d2/|V| {worst:.2g}")

    lo, hi = V1_MIN + 1e-6, base.v0 - V2_MIN - 1e-6
    v1 = np.linspace(lo, hi, 33)
    tot = np.array([solve_uoc(v, base).value + optimize_psi2(base.v0 - v, base).value for v in v1])
    worst_v1 = float(np.max(np.diff(tot, 2) / np.abs(tot[1:-1])))
    ok &= worst_v1 <= 1e-9
    notes.append(f"v1 concavity {worst_v1:.2g}")

    sig = base.gamma / (1.0 - base.prefs.p2)
    state = MarketState(0.5 * T, 1.0, base.illiquid.f0)
    vals, wealth = [], []
    for s in (sig * (1 - 1e-7), sig, sig * (1 + 1e-7)):
        sc = base.with_param("sigma_f", s)
        sol = solve_uow(30.0, 85.0, sc)
        vals.append(sol.value)
        wealth.append(uow_wealth(state, sol, sc))
    jump = max(_rel(vals[0], vals[1]), _rel(vals[2], vals[1]), _rel(wealth[0], wealth[1]), _rel(wealth[2], wealth[1]))
    ok &= jump <= 1e-4
    notes.append(f"case II jump {jump:.2g}")

    det = base.with_param("sigma_f", 0.0)
    near = base.with_param("sigma_f", 1e-6)
    a, b = optimize_psi2(85.0, near), optimize_psi2(85.0, det)
    limit = max(_rel(a.value, b.value), _rel(a.psi2_star, b.psi2_star),
                _rel(uow_wealth(state, a, near), uow_wealth(state, b, det)))
    ok &= limit <= 1e-4
    notes.append(f"sigmaF->0 {limit:.2g}")
    assert record("C6 structure", ok, ", ".join(notes), time.perf_counter() - start)


# 7. homotheticity

def test_c7_homotheticity():
    base = Scenario()
    big = base.scaled(10.0)
    start = time.perf_counter()
    pairs = {
        "OSIW": (osiw(solve_policy(base), base), osiw(solve_policy(big), big)),
        "SVF": (svf(base), svf(big)),
        "GEUG": (geug(base), geug(big)),
    }
    diffs = {k: abs(a - b) for k, (a, b) in pairs.items()}
    ok = all(d <= 1e-6 for d in diffs.values())
    detail = ", ".join(f"{k} {a:.6g} vs {b:.6g}" for k, (a, b) in pairs.items())
    assert record("C7 homotheticity", ok, detail, time.perf_counter() - start)


# 8. derivative checks and limits

def test_c8_derivatives():
    base = Scenario()
    sol = solve_policy(base)
    rng = make_rng(SEED + 8)
    T, g, sigma, kappa = base.horizon_T, base.gamma, base.market.sigma, base.kappa
    start = time.perf_counter()
    worst = {"xi_dz": 0.0, "uoc": 0.0, "uow": 0.0}
    for _ in range(100):
        args = random_xi_args(rng, g, base.market.r)
        fd = _central(lambda z: xi(dataclasses.replace(args, z=z)), args.z)
        worst["xi_dz"] = max(worst["xi_dz"], _rel(xi_dz(args), fd))

        t = rng.uniform(0.05, 0.95) * T
        z = float(np.exp(rng.uniform(-0.5, 0.5)))
        f = base.illiquid.f0 * float(np.exp(rng.uniform(-0.3, 0.3)))
        lam = sol.uoc.lambda1
        x1 = uoc_wealth(t, z, lam, base)
        fd1 = -g * z * _central(lambda v: uoc_wealth(t, v, lam, base), z) / (sigma * x1)
        worst["uoc"] = max(worst["uoc"], _rel(uoc_strategy(t, z, lam, base), fd1))

        # the asset moves with the kernel: f z^kappa is fixed along a Brownian move
        def x2(v):
            return uow_wealth(MarketState(t, v, f * (z / v) ** kappa), sol.uow, base)
        fd2 = -g * z * _central(x2, z) / (sigma * x2(z))
        worst["uow"] = max(worst["uow"], _rel(uow_strategy(MarketState(t, z, f), sol.uow, base), fd2))

    sc1 = base.with_param("c_floor", 1e-12)
    m1 = uoc_strategy(1.0, 1.1, solve_lambda1(20.0, sc1), sc1)
    sc2 = base.with_param("v_floor", 1e-12)
    m2 = uow_strategy(MarketState(1.0, 1.1, 1.0), solve_uow(0.0, 50.0, sc2), sc2)
    merton1, merton2 = g / (sigma * (1 - base.prefs.p1)), g / (sigma * (1 - base.prefs.p2))
    lim = max(_rel(m1, merton1), _rel(m2, merton2))
    ok = all(v <= 1e-5 for v in worst.values()) and lim <= 1e-6
    ok &= abs(merton1 - 0.266667) < 1e-6 and abs(merton2 - 0.4) < 1e-12
    detail = ", ".join(f"{k} {v:.2g}" for k, v in worst.items())
    assert record("C8 derivatives", ok, f"{detail}; Merton {m1:.6f}/{m2:.6f} (rel {lim:.2g})",
                  time.perf_counter() - start)
