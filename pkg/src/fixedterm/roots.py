"""Bracketing, root finding and one-dimensional maximisation helpers."""
from __future__ import annotations

import math
from typing import Callable

from scipy.optimize import brentq

from .errors import NumericalError

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def find_root(f: Callable[[float], float], lo: float, hi: float, xtol: float,
              flo: float | None = None, fhi: float | None = None) -> float:
    """Brent root of f on [lo, hi]; requires a sign change."""
    flo = f(lo) if flo is None else flo
    fhi = f(hi) if fhi is None else fhi
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise NumericalError(f"no sign change on [{lo!r}, {hi!r}]")
    return brentq(f, lo, hi, xtol=xtol, rtol=8.9e-16, maxiter=500)


def golden_section_max(f: Callable[[float], float], lo: float, hi: float, tol: float,
                       max_iter: int = 200) -> tuple[float, float]:
    """Maximiser and maximum of a unimodal f on [lo, hi] to width ``tol``."""
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def bisect_last_true(pred: Callable[[float], bool], lo: float, hi: float, rel_tol: float,
                     max_iter: int = 200) -> float:
    """Largest x in [lo, hi] with pred(x) true, assuming pred is true then false."""
    if pred(hi):
        return hi
    scale = max(abs(hi), abs(lo), 1e-300)
    for _ in range(max_iter):
        if hi - lo <= rel_tol * scale:
            break
        mid = 0.5 * (lo + hi)
        if pred(mid):
            lo = mid
        else:
            hi = mid
    return lo
