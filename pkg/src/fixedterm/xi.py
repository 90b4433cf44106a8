"""Truncated power moments of the pricing kernel and their time integrals.

Everything here is vectorised with numpy broadcasting; the scalar hot loops
used by the root finders live in the compiled kernel module.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import erfc

from .errors import InvalidArgumentError
from .market import IlliquidSpec, MarketSpec, asset_growth_exponent

_SQRT2 = math.sqrt(2.0)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class XiArgs:
    """Arguments of the truncated moment ``E[Z(s)^k 1{a < Z(s) < b} | Z(t) = z]``.

    Any field may be a numpy array; all fields broadcast together.
    """

    s: float
    t: float
    z: float
    k: float
    a: float
    b: float
    gamma: float
    r: float

    def __post_init__(self):
        if np.any(np.asarray(self.t) > np.asarray(self.s)):
            raise InvalidArgumentError("xi requires t <= s")
        if np.any(np.asarray(self.z) <= 0):
            raise InvalidArgumentError("xi requires z > 0")
        if np.any(np.asarray(self.a) < 0) or np.any(np.asarray(self.b) < 0):
            raise InvalidArgumentError("xi truncation bounds must be non-negative")


def normal_cdf(x):
    """Standard normal CDF through erfc, accurate in both tails."""
    out = 0.5 * erfc(-np.asarray(x, dtype=float) / _SQRT2)
    return out if np.ndim(out) else float(out)


def _log_pdf(x):
    return -0.5 * x * x - _LOG_SQRT_2PI


def _cdf_diff(u, v):
    """Phi(u) - Phi(v) for u >= v, differenced in whichever tail avoids cancellation."""
    u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
    upper = 0.5 * (erfc(v / _SQRT2) - erfc(u / _SQRT2))
    lower = 0.5 * (erfc(-u / _SQRT2) - erfc(-v / _SQRT2))
    middle = 1.0 - 0.5 * erfc(u / _SQRT2) - 0.5 * erfc(-v / _SQRT2)
    return np.where(v >= 0, upper, np.where(u <= 0, lower, middle))


def d_bar(x, s, t, z, r, gamma):
    """Standardised log-distance of bound ``x`` from the kernel's mean path.

    Returns +inf at ``x = 0`` and -inf at ``x = inf``.
    """
    s, t = np.asarray(s, float), np.asarray(t, float)
    if np.any(t >= s):
        raise InvalidArgumentError("d_bar requires t < s")
    tau = s - t
    with np.errstate(divide="ignore"):
        lx = np.log(np.asarray(x, float))
    out = (np.log(z) - lx - (r + 0.5 * gamma * gamma) * tau) / (gamma * np.sqrt(tau))
    return out if np.ndim(out) else float(out)


def _moment_parts(s, t, z, k, a, b, gamma, r):
    s, t, z, k, a, b, gamma, r = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (s, t, z, k, a, b, gamma, r)))
    tau = s - t
    vol = gamma * np.sqrt(tau)
    live = vol > 0
    safe_vol = np.where(live, vol, 1.0)
    m = r + 0.5 * gamma * gamma
    logz = np.log(z)
    with np.errstate(divide="ignore", invalid="ignore"):
        u = (logz - np.log(a) - m * tau) / safe_vol + k * vol
        v = (logz - np.log(b) - m * tau) / safe_vol + k * vol
    logpref = k * logz - k * m * tau + 0.5 * k * k * vol * vol
    return s, t, z, k, a, b, tau, vol, live, u, v, logpref, r


def truncated_moment(s, t, z, k, a, b, gamma, r):
    """Vectorised xi; see :func:`xi`."""
    s, t, z, k, a, b, tau, vol, live, u, v, logpref, r = _moment_parts(s, t, z, k, a, b, gamma, r)
    ordered = a < b
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        dphi = np.where(ordered & live, _cdf_diff(np.where(ordered, u, 0.0), np.where(ordered, v, 0.0)), 0.0)
        out = np.where(dphi > 0, np.exp(logpref + np.log(np.where(dphi > 0, dphi, 1.0))), 0.0)
        # zero-variance limit: the kernel is known exactly
        zs = z * np.exp(-r * tau)
        det = np.where(ordered & (a < zs) & (zs < b), np.exp(k * np.log(zs)), 0.0)
    out = np.where(live, out, det)
    return out if np.ndim(out) else float(out)


def xi(args: XiArgs):
    """Conditional truncated power moment of the pricing kernel.

    Computes ``E[Z(s)^k 1{a < Z(s) < b} | Z(t) = z]`` for the lognormal
    kernel with market price of risk ``gamma`` and rate ``r``. Returns 0 when
    ``a >= b`` and the indicator-valued limit ``z_s^k 1{a < z_s < b}`` with
    ``z_s = z exp(-r (s - t))`` when the conditional variance vanishes.
    """
    return truncated_moment(args.s, args.t, args.z, args.k, args.a, args.b, args.gamma, args.r)


def truncated_moment_dz(s, t, z, k, a, b, gamma, r):
    """Vectorised z-derivative of :func:`truncated_moment` (requires t < s)."""
    s, t, z, k, a, b, tau, vol, live, u, v, logpref, r = _moment_parts(s, t, z, k, a, b, gamma, r)
    if not np.all(live):
        raise InvalidArgumentError("xi_dz requires t < s and gamma != 0")
    ordered = a < b
    uu = np.where(ordered, u, 0.0)
    vv = np.where(ordered, v, 0.0)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        dphi = np.where(ordered, _cdf_diff(uu, vv), 0.0)
        base = np.where(dphi > 0, np.exp(logpref + np.log(np.where(dphi > 0, dphi, 1.0))), 0.0)
        pu = np.where(np.isfinite(uu), np.exp(logpref + _log_pdf(np.where(np.isfinite(uu), uu, 0.0))), 0.0)
        pv = np.where(np.isfinite(vv), np.exp(logpref + _log_pdf(np.where(np.isfinite(vv), vv, 0.0))), 0.0)
    out = np.where(ordered, (k * base + (pu - pv) / vol) / z, 0.0)
    return out if np.ndim(out) else float(out)


def xi_dz(args: XiArgs):
    """Analytic partial derivative of :func:`xi` in ``z``."""
    return truncated_moment_dz(args.s, args.t, args.z, args.k, args.a, args.b, args.gamma, args.r)


def h_factor(t1: float, t2: float, illiquid: IlliquidSpec, market: MarketSpec) -> float:
    """Growth of F between t1 and t2 at a fixed kernel ratio."""
    if t1 > t2:
        raise InvalidArgumentError("h_factor requires t1 <= t2")
    return math.exp(asset_growth_exponent(illiquid, market) * (t2 - t1))


@functools.lru_cache(maxsize=32)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(int(n))
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def crossing_times(z, k, bound, gamma, r):
    """Horizon tau at which a truncation bound sits at the moment's centre.

    The integrand ``tau -> xi(t + tau, t, z, k, ., bound)`` changes shape most
    quickly there; nan where no positive crossing exists.
    """
    z, k, bound = np.broadcast_arrays(*(np.asarray(v, float) for v in (z, k, bound)))
    slope = r + 0.5 * gamma * gamma - k * gamma * gamma
    with np.errstate(divide="ignore", invalid="ignore"):
        tau = (np.log(z) - np.log(bound)) / slope
    ok = np.isfinite(tau) & (tau > 0) & (bound > 0)
    return np.where(ok, tau, np.nan)


def time_nodes(tau_max, crossings, n: int):
    """Quadrature nodes on ``[0, tau_max]`` in the variable ``sqrt(tau)``.

    ``tau_max`` has shape ``(N,)``, ``crossings`` shape ``(N, m)`` with nan
    for absent breaks. Returns ``(tau, weight)`` arrays of shape
    ``(N, (m + 1) * n)``; weights include the Jacobian ``2 sqrt(tau)``.
    """
    tau_max = np.atleast_1d(np.asarray(tau_max, float))
    crossings = np.asarray(crossings, float).reshape(tau_max.shape[0], -1)
    wmax = np.sqrt(tau_max)[:, None]
    inner = np.sqrt(np.clip(np.where(np.isnan(crossings), tau_max[:, None], crossings), 0.0, tau_max[:, None]))
    inner = np.sort(inner, axis=1)
    edges = np.concatenate([np.zeros_like(wmax), inner, wmax], axis=1)
    lo, hi = edges[:, :-1], edges[:, 1:]
    x, wq = gauss_legendre(n)
    half = 0.5 * (hi - lo)
    w_nodes = (0.5 * (hi + lo))[:, :, None] + half[:, :, None] * x
    weights = half[:, :, None] * wq * 2.0 * w_nodes
    shape = (tau_max.shape[0], -1)
    return (w_nodes * w_nodes).reshape(shape), weights.reshape(shape)


def integrate_xi_over_time(builder: Callable[[np.ndarray], XiArgs], t_lo: float, t_hi: float,
                           quad_n: int = 64, breaks: Sequence[float] = ()) -> float:
    """Integrate ``s -> xi(builder(s))`` over ``[t_lo, t_hi]``.

    Gauss-Legendre in ``sqrt(s - t_lo)``. Where the builder's truncation
    bounds cross the kernel's centre inside the interval the range is split
    there; ``breaks`` adds further split times.
    """
    if t_lo > t_hi:
        raise InvalidArgumentError("integrate_xi_over_time requires t_lo <= t_hi")
    if t_hi == t_lo:
        return 0.0
    tau_max = t_hi - t_lo
    probe = builder(np.array([t_hi]))
    cuts = [b - t_lo for b in breaks]
    if np.ndim(probe.z) == 0 and np.ndim(probe.k) == 0 and np.ndim(probe.t) == 0 and float(probe.t) == t_lo:
        for bound in (probe.a, probe.b):
            if np.ndim(bound) == 0 and 0 < float(bound) < math.inf:
                cuts.append(float(crossing_times(probe.z, probe.k, bound, probe.gamma, probe.r)))
    taus, weights = time_nodes(np.array([tau_max]), np.array([cuts if cuts else [np.nan]]), quad_n)
    vals = xi(builder(t_lo + taus[0]))
    return float(np.sum(weights[0] * vals))
