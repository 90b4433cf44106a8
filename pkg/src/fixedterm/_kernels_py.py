"""Scalar kernels in pure Python.

Mirrors the compiled ``_kernels`` extension function for function; used when
the extension is unavailable and as a cross-check in tests. All multipliers
are solved at the initial state (t = 0, z = 1).
"""
import math

from scipy.optimize import brentq

INF = math.inf
_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_MAX_EXPAND = 60
_LOG_CAP = 700.0  # multipliers beyond exp(+-700) are treated as unbracketed


def _exp(x):
    if x > 709.0:
        return INF
    if x < -745.0:
        return 0.0
    return math.exp(x)


def _log(x):
    if x <= 0.0:
        return -INF
    return math.log(x)


def norm_cdf(x):
    return 0.5 * math.erfc(-x / _SQRT2)


def _cdf_diff(u, v):
    # Phi(u) - Phi(v) for u >= v
    if v >= 0.0:
        return 0.5 * (math.erfc(v / _SQRT2) - math.erfc(u / _SQRT2))
    if u <= 0.0:
        return 0.5 * (math.erfc(-u / _SQRT2) - math.erfc(-v / _SQRT2))
    return 1.0 - 0.5 * math.erfc(u / _SQRT2) - 0.5 * math.erfc(-v / _SQRT2)


def _pdf(x):
    if x == INF or x == -INF:
        return 0.0
    return _INV_SQRT_2PI * math.exp(-0.5 * x * x)


def xi(s, t, z, k, a, b, g, r):
    return xi_scaled(0.0, s, t, z, k, a, b, g, r)


def xi_scaled(lc, s, t, z, k, a, b, g, r):
    """exp(lc) * xi, with lc folded into the exponent so neither factor over- or underflows."""
    if not a < b:
        return 0.0
    tau = s - t
    vol = g * math.sqrt(tau) if tau > 0.0 else 0.0
    if vol == 0.0:
        zs = z * math.exp(-r * tau)
        return _exp(lc + k * math.log(zs)) if a < zs < b else 0.0
    m = r + 0.5 * g * g
    lz = math.log(z)
    u = INF if a == 0.0 else (lz - math.log(a) - m * tau) / vol + k * vol
    v = -INF if b == INF else (lz - math.log(b) - m * tau) / vol + k * vol
    dphi = _cdf_diff(u, v)
    if dphi <= 0.0:
        return 0.0
    return _exp(lc + k * lz - k * m * tau + 0.5 * k * k * vol * vol + math.log(dphi))


def xi_dz(s, t, z, k, a, b, g, r):
    tau = s - t
    if not tau > 0.0 or g == 0.0:
        raise ValueError("xi_dz requires t < s and gamma != 0")
    if not a < b:
        return 0.0
    vol = g * math.sqrt(tau)
    m = r + 0.5 * g * g
    lz = math.log(z)
    u = INF if a == 0.0 else (lz - math.log(a) - m * tau) / vol + k * vol
    v = -INF if b == INF else (lz - math.log(b) - m * tau) / vol + k * vol
    pref = _exp(k * lz - k * m * tau + 0.5 * k * k * vol * vol)
    return pref * (k * _cdf_diff(u, v) + (_pdf(u) - _pdf(v)) / vol) / z


def _crossing(k, bound, g, r):
    # tau at which the truncation bound meets the centre of the moment (z = 1)
    if not 0.0 < bound < INF:
        return -1.0
    slope = r + 0.5 * g * g - k * g * g
    if slope == 0.0:
        return -1.0
    return -math.log(bound) / slope


def _panel_edges(T, cuts):
    wmax = math.sqrt(T)
    edges = [0.0, wmax]
    for c in cuts:
        if 0.0 < c < T:
            edges.append(math.sqrt(c))
    edges.sort()
    return edges


def _integrate(fun, T, cuts, x, w):
    total = 0.0
    edges = _panel_edges(T, cuts)
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi <= lo:
            continue
        mid = 0.5 * (hi + lo)
        half = 0.5 * (hi - lo)
        acc = 0.0
        for xj, wj in zip(x, w):
            s = mid + half * xj
            acc += wj * 2.0 * s * fun(s * s)
        total += half * acc
    return total


# ---------------------------------------------------------------- consumption

def uoc_budget(lam, p1, cf, T, g, r, x, w):
    """Present value at time 0 of optimal floored consumption for multiplier lam."""
    q = 1.0 / (p1 - 1.0)
    k1 = p1 * q
    zc = _exp((p1 - 1.0) * math.log(cf) - math.log(lam))
    lc1 = q * math.log(lam)
    cuts = (_crossing(k1, zc, g, r), _crossing(1.0, zc, g, r))

    def fun(s):
        return xi_scaled(lc1, s, 0.0, 1.0, k1, 0.0, zc, g, r) + cf * xi(s, 0.0, 1.0, 1.0, zc, INF, g, r)

    return _integrate(fun, T, cuts, x, w)


def uoc_value(lam, p1, cf, T, g, r, x, w):
    """Expected utility of optimal floored consumption for multiplier lam."""
    q = 1.0 / (p1 - 1.0)
    k1 = p1 * q
    zc = _exp((p1 - 1.0) * math.log(cf) - math.log(lam))
    lc1 = k1 * math.log(lam)
    c0 = cf ** p1
    cuts = (_crossing(k1, zc, g, r), _crossing(0.0, zc, g, r))

    def fun(s):
        return (xi_scaled(lc1, s, 0.0, 1.0, k1, 0.0, zc, g, r) + c0 * xi(s, 0.0, 1.0, 0.0, zc, INF, g, r)) / p1

    return _integrate(fun, T, cuts, x, w)


def _solve_log_multiplier(budget, target, log_scale, tol):
    """Root in y = log(lam) of budget(exp(y)) = target; budget strictly decreasing."""
    def f(y):
        return budget(math.exp(y)) / target - 1.0

    span = 40.0 * math.log(2.0)
    lo = max(log_scale - span, -_LOG_CAP)
    hi = min(log_scale + span, _LOG_CAP)
    flo, fhi = f(lo), f(hi)
    n = 0
    while flo < 0.0 and n < _MAX_EXPAND and lo > -_LOG_CAP:
        hi, fhi = lo, flo
        lo = max(lo - span, -_LOG_CAP)
        span *= 2.0
        flo = f(lo)
        n += 1
    while fhi > 0.0 and n < _MAX_EXPAND and hi < _LOG_CAP:
        lo, flo = hi, fhi
        hi = min(hi + span, _LOG_CAP)
        span *= 2.0
        fhi = f(hi)
        n += 1
    if not (flo >= 0.0 >= fhi):
        return math.nan
    if flo == 0.0:
        return math.exp(lo)
    if fhi == 0.0:
        return math.exp(hi)
    y = brentq(f, lo, hi, xtol=tol, rtol=8.9e-16, maxiter=200)
    return math.exp(y)


def uoc_lambda(v1, p1, cf, T, g, r, x, w, tol):
    """Multiplier matching the consumption budget to v1; nan if no bracket."""
    return _solve_log_multiplier(
        lambda lam: uoc_budget(lam, p1, cf, T, g, r, x, w), v1,
        (p1 - 1.0) * math.log(v1 / T), tol)


# ---------------------------------------------------------------- terminal wealth

def floor_crossing(A, vf, kappa):
    """Kernel level below which the scaled asset payoff A z^-kappa exceeds vf."""
    if A <= 0.0:
        return 0.0
    if kappa == 0.0:
        return INF if A > vf else 0.0
    return _exp((math.log(A) - math.log(vf)) / kappa)


def uow_regions(lam, A, vf, p2, kappa):
    """Kernel intervals on which floor, asset payoff and unconstrained wealth are the max.

    Returns ``(zvf, v_lo, f_lo, f_hi, i_lo, i_hi)``; the floor region is
    ``(v_lo, inf)``. Empty intervals have ``lo >= hi``.
    """
    zvf = floor_crossing(A, vf, kappa)
    ziv = _exp((p2 - 1.0) * math.log(vf) - math.log(lam))
    v_lo = max(zvf, ziv)
    if A <= 0.0:
        return zvf, v_lo, 0.0, 0.0, 0.0, ziv
    D = 1.0 - kappa * (1.0 - p2)
    if abs(D) <= 1e-12:
        if math.log(lam) >= (p2 - 1.0) * math.log(A):
            return zvf, v_lo, 0.0, zvf, 0.0, 0.0
        return zvf, v_lo, 0.0, 0.0, 0.0, ziv
    zif = _exp(((p2 - 1.0) * math.log(A) - math.log(lam)) / D)
    if D > 0.0:
        return zvf, v_lo, zif, zvf, 0.0, min(ziv, zif)
    return zvf, v_lo, 0.0, min(zif, zvf), zif, ziv


def put_price(A, vf, kappa, T, g, r):
    """Time-0 cost of the floor shortfall (vf - A Z(T)^-kappa)^+."""
    if A <= 0.0:
        return vf * math.exp(-r * T)
    zvf = floor_crossing(A, vf, kappa)
    return (vf * xi(T, 0.0, 1.0, 1.0, zvf, INF, g, r)
            - A * xi(T, 0.0, 1.0, 1.0 - kappa, zvf, INF, g, r))


def aux_budget(lam, A, vf, p2, kappa, T, g, r):
    """Time-0 cost of the excess of unconstrained wealth over the replicated floor."""
    zvf, v_lo, f_lo, f_hi, i_lo, i_hi = uow_regions(lam, A, vf, p2, kappa)
    if not i_lo < i_hi:
        return 0.0
    kI = p2 / (p2 - 1.0)
    out = xi_scaled(math.log(lam) / (p2 - 1.0), T, 0.0, 1.0, kI, i_lo, i_hi, g, r)
    out -= vf * xi(T, 0.0, 1.0, 1.0, max(i_lo, zvf), i_hi, g, r)
    if A > 0.0:
        out -= A * xi(T, 0.0, 1.0, 1.0 - kappa, i_lo, min(i_hi, zvf), g, r)
    return out


def aux_value(lam, A, vf, p2, kappa, T, g, r):
    """Expected utility of optimal terminal wealth; ``lam = inf`` gives pure replication."""
    if lam == INF:
        zvf = floor_crossing(A, vf, kappa)
        v_lo, f_lo, f_hi, i_lo, i_hi = zvf, 0.0, zvf, 0.0, 0.0
    else:
        zvf, v_lo, f_lo, f_hi, i_lo, i_hi = uow_regions(lam, A, vf, p2, kappa)
    out = vf ** p2 * xi(T, 0.0, 1.0, 0.0, v_lo, INF, g, r)
    if A > 0.0 and f_lo < f_hi:
        out += xi_scaled(p2 * math.log(A), T, 0.0, 1.0, -kappa * p2, f_lo, f_hi, g, r)
    if i_lo < i_hi:
        out += xi_scaled(p2 / (p2 - 1.0) * math.log(lam), T, 0.0, 1.0, p2 / (p2 - 1.0), i_lo, i_hi, g, r)
    return out / p2


def aux_lambda(xt, A, vf, p2, kappa, T, g, r, tol):
    """Multiplier matching the auxiliary budget to xt > 0; nan if no bracket."""
    return _solve_log_multiplier(
        lambda lam: aux_budget(lam, A, vf, p2, kappa, T, g, r), xt,
        (p2 - 1.0) * math.log(xt + vf + max(A, 0.0)), tol)
