"""Compare the compiled and pure-Python kernel backends.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import contextlib
import math
import timeit

from fixedterm import kernels, policy
from fixedterm.market import Scenario


@contextlib.contextmanager
def use_backend(name):
    saved = kernels.impl
    kernels.impl = kernels.get_backend(name)
    policy._solve_cached.cache_clear()
    try:
        yield kernels.impl
    finally:
        kernels.impl = saved
        policy._solve_cached.cache_clear()


def cases(mod):
    sc = Scenario()
    g, r, T = sc.gamma, sc.market.r, sc.horizon_T
    x, w = kernels.quad_rule(sc.numerics.quad_nodes, mod)
    A = 40.0 * math.exp(0.1)

    def solve():
        policy._solve_cached.cache_clear()
        policy.solve_policy(sc)

    return {
        "xi": (lambda: mod.xi(2.0, 0.5, 1.1, 1.5, 0.3, 2.0, g, r), 20000),
        "uoc_budget": (lambda: mod.uoc_budget(1e-3, -2.0, 3.0, T, g, r, x, w), 500),
        "uoc_lambda": (lambda: mod.uoc_lambda(25.0, -2.0, 3.0, T, g, r, x, w, 1e-12), 20),
        "aux_lambda": (lambda: mod.aux_lambda(5.0, A, 80.0, -1.0, sc.kappa, T, g, r, 1e-12), 200),
        "solve_policy": (solve, 3),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    names = kernels.available_backends()
    timings = {}
    for name in names:
        with use_backend(name) as mod:
            for case, (fn, number) in cases(mod).items():
                best = min(timeit.repeat(fn, number=number, repeat=args.repeat)) / number
                timings.setdefault(case, {})[name] = best
    print(f"{'case':<14}" + "".join(f"{n:>14}" for n in names) + ("   speedup" if len(names) > 1 else ""))
    for case, row in timings.items():
        line = f"{case:<14}" + "".join(f"{row[n] * 1e6:>12.1f}us" for n in names)
        if "cython" in row:
            line += f"   {row['python'] / row['cython']:7.1f}x"
        print(line)


if __name__ == "__main__":
    main()
