# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled scalar kernels; same signatures and results as ``_kernels_py``."""
from libc.math cimport exp, log, pow, sqrt, erfc, fabs, INFINITY, NAN, M_PI
from scipy.optimize.cython_optimize cimport brentq

cdef double INF = INFINITY
cdef double _SQRT2 = sqrt(2.0)
cdef double _INV_SQRT_2PI = 1.0 / sqrt(2.0 * M_PI)
cdef int _MAX_EXPAND = 60
cdef double _LOG_CAP = 700.0


cdef inline double _exp(double x) noexcept nogil:
    if x > 709.0:
        return INF
    if x < -745.0:
        return 0.0
    return exp(x)


cdef inline double _cdf_diff(double u, double v) noexcept nogil:
    if v >= 0.0:
        return 0.5 * (erfc(v / _SQRT2) - erfc(u / _SQRT2))
    if u <= 0.0:
        return 0.5 * (erfc(-u / _SQRT2) - erfc(-v / _SQRT2))
    return 1.0 - 0.5 * erfc(u / _SQRT2) - 0.5 * erfc(-v / _SQRT2)


cdef inline double _pdf(double x) noexcept nogil:
    if x == INF or x == -INF:
        return 0.0
    return _INV_SQRT_2PI * exp(-0.5 * x * x)


def norm_cdf(double x):
    return 0.5 * erfc(-x / _SQRT2)


cdef double _xi_scaled(double lc, double s, double t, double z, double k, double a, double b,
                       double g, double r) noexcept nogil:
    cdef double tau, vol, zs, m, lz, u, v, dphi
    if not a < b:
        return 0.0
    tau = s - t
    vol = g * sqrt(tau) if tau > 0.0 else 0.0
    if vol == 0.0:
        zs = z * exp(-r * tau)
        return _exp(lc + k * log(zs)) if a < zs < b else 0.0
    m = r + 0.5 * g * g
    lz = log(z)
    u = INF if a == 0.0 else (lz - log(a) - m * tau) / vol + k * vol
    v = -INF if b == INF else (lz - log(b) - m * tau) / vol + k * vol
    dphi = _cdf_diff(u, v)
    if dphi <= 0.0:
        return 0.0
    return _exp(lc + k * lz - k * m * tau + 0.5 * k * k * vol * vol + log(dphi))


cdef inline double _xi(double s, double t, double z, double k, double a, double b,
                       double g, double r) noexcept nogil:
    return _xi_scaled(0.0, s, t, z, k, a, b, g, r)


def xi_scaled(double lc, double s, double t, double z, double k, double a, double b, double g, double r):
    return _xi_scaled(lc, s, t, z, k, a, b, g, r)


def xi(double s, double t, double z, double k, double a, double b, double g, double r):
    return _xi(s, t, z, k, a, b, g, r)


def xi_dz(double s, double t, double z, double k, double a, double b, double g, double r):
    cdef double tau = s - t, vol, m, lz, u, v, pref
    if not tau > 0.0 or g == 0.0:
        raise ValueError("xi_dz requires t < s and gamma != 0")
    if not a < b:
        return 0.0
    vol = g * sqrt(tau)
    m = r + 0.5 * g * g
    lz = log(z)
    u = INF if a == 0.0 else (lz - log(a) - m * tau) / vol + k * vol
    v = -INF if b == INF else (lz - log(b) - m * tau) / vol + k * vol
    pref = _exp(k * lz - k * m * tau + 0.5 * k * k * vol * vol)
    return pref * (k * _cdf_diff(u, v) + (_pdf(u) - _pdf(v)) / vol) / z


cdef inline double _crossing(double k, double bound, double g, double r) noexcept nogil:
    cdef double slope
    if not (0.0 < bound < INF):
        return -1.0
    slope = r + 0.5 * g * g - k * g * g
    if slope == 0.0:
        return -1.0
    return -log(bound) / slope


# integrand selector for the panel integrator
cdef struct Integrand:
    double lc1, c0, div, k1, kf, zc, g, r


cdef double _eval(Integrand* p, double s) noexcept nogil:
    return (_xi_scaled(p.lc1, s, 0.0, 1.0, p.k1, 0.0, p.zc, p.g, p.r)
            + p.c0 * _xi(s, 0.0, 1.0, p.kf, p.zc, INF, p.g, p.r)) / p.div


cdef double _integrate(Integrand* p, double T, double cut1, double cut2,
                       const double* x, const double* w, int n) noexcept nogil:
    cdef double edges[4]
    cdef double tmp, lo, hi, mid, half, acc, s, total = 0.0
    cdef int ne = 2, i, j
    edges[0] = 0.0
    edges[1] = sqrt(T)
    if 0.0 < cut1 < T:
        edges[ne] = sqrt(cut1)
        ne += 1
    if 0.0 < cut2 < T:
        edges[ne] = sqrt(cut2)
        ne += 1
    # insertion sort on at most four entries
    for i in range(1, ne):
        tmp = edges[i]
        j = i - 1
        while j >= 0 and edges[j] > tmp:
            edges[j + 1] = edges[j]
            j -= 1
        edges[j + 1] = tmp
    for i in range(ne - 1):
        lo = edges[i]
        hi = edges[i + 1]
        if hi <= lo:
            continue
        mid = 0.5 * (hi + lo)
        half = 0.5 * (hi - lo)
        acc = 0.0
        for j in range(n):
            s = mid + half * x[j]
            acc += w[j] * 2.0 * s * _eval(p, s * s)
        total += half * acc
    return total


cdef double _uoc_budget(double lam, double p1, double cf, double T, double g, double r,
                        const double* x, const double* w, int n) noexcept nogil:
    cdef Integrand p
    cdef double q = 1.0 / (p1 - 1.0)
    p.k1 = p1 * q
    p.kf = 1.0
    p.zc = _exp((p1 - 1.0) * log(cf) - log(lam))
    p.lc1 = q * log(lam)
    p.c0 = cf
    p.div = 1.0
    p.g = g
    p.r = r
    return _integrate(&p, T, _crossing(p.k1, p.zc, g, r), _crossing(1.0, p.zc, g, r), x, w, n)


def uoc_budget(double lam, double p1, double cf, double T, double g, double r,
               const double[::1] x, const double[::1] w):
    return _uoc_budget(lam, p1, cf, T, g, r, &x[0], &w[0], x.shape[0])


def uoc_value(double lam, double p1, double cf, double T, double g, double r,
              const double[::1] x, const double[::1] w):
    cdef Integrand p
    cdef double q = 1.0 / (p1 - 1.0)
    p.k1 = p1 * q
    p.kf = 0.0
    p.zc = _exp((p1 - 1.0) * log(cf) - log(lam))
    p.lc1 = p.k1 * log(lam)
    p.c0 = pow(cf, p1)
    p.div = p1
    p.g = g
    p.r = r
    return _integrate(&p, T, _crossing(p.k1, p.zc, g, r), _crossing(0.0, p.zc, g, r), &x[0], &w[0], x.shape[0])


# ---------------------------------------------------------------- terminal wealth

cdef inline double _floor_crossing(double A, double vf, double kappa) noexcept nogil:
    if A <= 0.0:
        return 0.0
    if kappa == 0.0:
        return INF if A > vf else 0.0
    return _exp((log(A) - log(vf)) / kappa)


cdef void _regions(double lam, double A, double vf, double p2, double kappa,
                   double* out) noexcept nogil:
    # out: zvf, v_lo, f_lo, f_hi, i_lo, i_hi
    cdef double zvf = _floor_crossing(A, vf, kappa)
    cdef double ziv = _exp((p2 - 1.0) * log(vf) - log(lam))
    cdef double D, zif
    out[0] = zvf
    out[1] = zvf if zvf > ziv else ziv
    out[2] = 0.0
    out[3] = 0.0
    out[4] = 0.0
    out[5] = 0.0
    if A <= 0.0:
        out[5] = ziv
        return
    D = 1.0 - kappa * (1.0 - p2)
    if fabs(D) <= 1e-12:
        if log(lam) >= (p2 - 1.0) * log(A):
            out[3] = zvf
        else:
            out[5] = ziv
        return
    zif = _exp(((p2 - 1.0) * log(A) - log(lam)) / D)
    if D > 0.0:
        out[2] = zif
        out[3] = zvf
        out[5] = ziv if ziv < zif else zif
    else:
        out[3] = zif if zif < zvf else zvf
        out[4] = zif
        out[5] = ziv


def floor_crossing(double A, double vf, double kappa):
    return _floor_crossing(A, vf, kappa)


def uow_regions(double lam, double A, double vf, double p2, double kappa):
    cdef double out[6]
    _regions(lam, A, vf, p2, kappa, out)
    return out[0], out[1], out[2], out[3], out[4], out[5]


def put_price(double A, double vf, double kappa, double T, double g, double r):
    cdef double zvf
    if A <= 0.0:
        return vf * exp(-r * T)
    zvf = _floor_crossing(A, vf, kappa)
    return (vf * _xi(T, 0.0, 1.0, 1.0, zvf, INF, g, r)
            - A * _xi(T, 0.0, 1.0, 1.0 - kappa, zvf, INF, g, r))


cdef double _aux_budget(double lam, double A, double vf, double p2, double kappa,
                        double T, double g, double r) noexcept nogil:
    cdef double reg[6]
    cdef double kI, res, lo
    _regions(lam, A, vf, p2, kappa, reg)
    if not reg[4] < reg[5]:
        return 0.0
    kI = p2 / (p2 - 1.0)
    res = _xi_scaled(log(lam) / (p2 - 1.0), T, 0.0, 1.0, kI, reg[4], reg[5], g, r)
    lo = reg[4] if reg[4] > reg[0] else reg[0]
    res -= vf * _xi(T, 0.0, 1.0, 1.0, lo, reg[5], g, r)
    if A > 0.0:
        res -= A * _xi(T, 0.0, 1.0, 1.0 - kappa, reg[4], reg[5] if reg[5] < reg[0] else reg[0], g, r)
    return res


def aux_budget(double lam, double A, double vf, double p2, double kappa, double T, double g, double r):
    return _aux_budget(lam, A, vf, p2, kappa, T, g, r)


def aux_value(double lam, double A, double vf, double p2, double kappa, double T, double g, double r):
    cdef double reg[6]
    cdef double res
    if lam == INF:
        reg[0] = _floor_crossing(A, vf, kappa)
        reg[1] = reg[0]
        reg[2] = 0.0
        reg[3] = reg[0]
        reg[4] = 0.0
        reg[5] = 0.0
    else:
        _regions(lam, A, vf, p2, kappa, reg)
    res = pow(vf, p2) * _xi(T, 0.0, 1.0, 0.0, reg[1], INF, g, r)
    if A > 0.0 and reg[2] < reg[3]:
        res += _xi_scaled(p2 * log(A), T, 0.0, 1.0, -kappa * p2, reg[2], reg[3], g, r)
    if reg[4] < reg[5]:
        res += _xi_scaled(p2 / (p2 - 1.0) * log(lam), T, 0.0, 1.0, p2 / (p2 - 1.0), reg[4], reg[5], g, r)
    return res / p2


# ---------------------------------------------------------------- multiplier solves

cdef struct BudgetArgs:
    int kind          # 0 consumption, 1 auxiliary
    double target
    double p, cf, A, vf, kappa, T, g, r
    const double* x
    const double* w
    int n


cdef double _budget_residual(double y, void* args) noexcept:
    cdef BudgetArgs* a = <BudgetArgs*> args
    cdef double lam = exp(y)
    if a.kind == 0:
        return _uoc_budget(lam, a.p, a.cf, a.T, a.g, a.r, a.x, a.w, a.n) / a.target - 1.0
    return _aux_budget(lam, a.A, a.vf, a.p, a.kappa, a.T, a.g, a.r) / a.target - 1.0


cdef double _solve(BudgetArgs* a, double log_scale, double tol):
    cdef double span = 40.0 * log(2.0)
    cdef double lo = log_scale - span, hi = log_scale + span
    cdef double flo, fhi
    if lo < -_LOG_CAP:
        lo = -_LOG_CAP
    if hi > _LOG_CAP:
        hi = _LOG_CAP
    flo = _budget_residual(lo, a)
    fhi = _budget_residual(hi, a)
    cdef int n = 0
    while flo < 0.0 and n < _MAX_EXPAND and lo > -_LOG_CAP:
        hi = lo
        fhi = flo
        lo = lo - span if lo - span > -_LOG_CAP else -_LOG_CAP
        span *= 2.0
        flo = _budget_residual(lo, a)
        n += 1
    while fhi > 0.0 and n < _MAX_EXPAND and hi < _LOG_CAP:
        lo = hi
        flo = fhi
        hi = hi + span if hi + span < _LOG_CAP else _LOG_CAP
        span *= 2.0
        fhi = _budget_residual(hi, a)
        n += 1
    if not (flo >= 0.0 >= fhi):
        return NAN
    if flo == 0.0:
        return exp(lo)
    if fhi == 0.0:
        return exp(hi)
    return exp(brentq(_budget_residual, lo, hi, <void*> a, tol, 8.9e-16, 200, NULL))


def uoc_lambda(double v1, double p1, double cf, double T, double g, double r,
               const double[::1] x, const double[::1] w, double tol):
    cdef BudgetArgs a
    a.kind = 0
    a.target = v1
    a.p = p1
    a.cf = cf
    a.T = T
    a.g = g
    a.r = r
    a.x = &x[0]
    a.w = &w[0]
    a.n = x.shape[0]
    return _solve(&a, (p1 - 1.0) * log(v1 / T), tol)


def aux_lambda(double xt, double A, double vf, double p2, double kappa, double T, double g,
               double r, double tol):
    cdef BudgetArgs a
    a.kind = 1
    a.target = xt
    a.p = p2
    a.A = A
    a.vf = vf
    a.kappa = kappa
    a.T = T
    a.g = g
    a.r = r
    return _solve(&a, (p2 - 1.0) * log(xt + vf + (A if A > 0.0 else 0.0)), tol)
