# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled solver kernel.

Mirrors ``_pure`` operation-for-operation; the expression order matters for
bit-compatibility with the fallback (built with -ffp-contract=off).
"""

from libc.math cimport erf, erfc, exp, expm1, fabs, isinf, isnan, INFINITY, NAN

import numpy as np

cdef enum:
    _KIND_EXPONENTIAL = 0
    _KIND_GAUSSIAN = 1
    _KIND_UNIFORM = 2

KIND_EXPONENTIAL = _KIND_EXPONENTIAL
KIND_GAUSSIAN = _KIND_GAUSSIAN
KIND_UNIFORM = _KIND_UNIFORM

cdef enum:
    _STATUS_CONVERGED = 0
    _STATUS_COLLAPSED = 1
    _STATUS_MAX_ITERATIONS = 2

STATUS_CONVERGED = _STATUS_CONVERGED
STATUS_COLLAPSED = _STATUS_COLLAPSED
STATUS_MAX_ITERATIONS = _STATUS_MAX_ITERATIONS

cdef double _INV_SQRT_2PI = 0.3989422804014326779
cdef double _INV_SQRT_2 = 0.7071067811865475244


cdef inline double _norm_pdf(double x) noexcept nogil:
    return _INV_SQRT_2PI * exp(-0.5 * x * x)


cdef inline double _norm_sf(double x) noexcept nogil:
    return 0.5 * erfc(x * _INV_SQRT_2)


cdef inline double _gauss_mass_std(double alpha, double beta) noexcept nogil:
    if alpha >= 0.0:
        return _norm_sf(alpha) - _norm_sf(beta)
    if beta <= 0.0:
        return _norm_sf(-beta) - _norm_sf(-alpha)
    return 0.5 * (erf(beta * _INV_SQRT_2) - erf(alpha * _INV_SQRT_2))


cdef double _truncated_mean(int kind, double p0, double p1, double a,
                            double b) noexcept nogil:
    cdef double lam, lo, hi, w, mu, sigma, alpha, beta, mass, pa, pb
    if kind == _KIND_EXPONENTIAL:
        lam = p0
        lo = a if a > 0.0 else 0.0
        if b <= lo:
            return NAN
        if isinf(b):
            return lo + 1.0 / lam
        w = b - lo
        return lo + 1.0 / lam - w / expm1(lam * w)
    if kind == _KIND_GAUSSIAN:
        mu = p0
        sigma = p1
        alpha = -INFINITY if (isinf(a) and a < 0) else (a - mu) / sigma
        beta = INFINITY if (isinf(b) and b > 0) else (b - mu) / sigma
        if isinf(alpha) and isinf(beta):
            return mu
        mass = _gauss_mass_std(alpha, beta)
        if mass <= 0.0 or isnan(mass) or isinf(mass):
            return NAN
        pa = 0.0 if isinf(alpha) else _norm_pdf(alpha)
        pb = 0.0 if isinf(beta) else _norm_pdf(beta)
        return mu + sigma * (pa - pb) / mass
    # uniform
    lo = a if a > p0 else p0
    hi = b if b < p1 else p1
    if hi <= lo:
        return NAN
    return 0.5 * (lo + hi)


cdef double _bin_mass(int kind, double p0, double p1, double a,
                      double b) noexcept nogil:
    cdef double lam, lo, hi, mu, sigma, alpha, beta, m
    if kind == _KIND_EXPONENTIAL:
        lam = p0
        lo = a if a > 0.0 else 0.0
        if b <= lo:
            return 0.0
        if isinf(b):
            return exp(-lam * lo)
        return -exp(-lam * lo) * expm1(-lam * (b - lo))
    if kind == _KIND_GAUSSIAN:
        mu = p0
        sigma = p1
        alpha = -INFINITY if (isinf(a) and a < 0) else (a - mu) / sigma
        beta = INFINITY if (isinf(b) and b > 0) else (b - mu) / sigma
        if isinf(alpha) and isinf(beta):
            return 1.0
        if isinf(alpha):
            return _norm_sf(-beta)
        if isinf(beta):
            return _norm_sf(alpha)
        m = _gauss_mass_std(alpha, beta)
        return m if m > 0.0 else 0.0
    lo = a if a > p0 else p0
    hi = b if b < p1 else p1
    if hi <= lo:
        return 0.0
    return (hi - lo) / (p1 - p0)


def truncated_mean(int kind, double p0, double p1, double a, double b):
    return _truncated_mean(kind, p0, p1, a, b)


def bin_mass(int kind, double p0, double p1, double a, double b):
    return _bin_mass(kind, p0, p1, a, b)


cdef void _support(int kind, double p0, double p1, double* lo,
                   double* hi) noexcept nogil:
    if kind == _KIND_EXPONENTIAL:
        lo[0] = 0.0
        hi[0] = INFINITY
    elif kind == _KIND_GAUSSIAN:
        lo[0] = -INFINITY
        hi[0] = INFINITY
    else:
        lo[0] = p0
        hi[0] = p1


cdef bint _step(int kind, double p0, double p1, double lo, double hi,
                double bias, double merge_tol, Py_ssize_t k,
                double* edges, double* cents, double* out) noexcept nogil:
    cdef Py_ssize_t i
    cdef double prev = lo
    cdef double last = lo
    cdef double m, gap
    cdef bint ok = True
    for i in range(k):
        cents[i] = _truncated_mean(kind, p0, p1, prev, edges[i])
        prev = edges[i]
    cents[k] = _truncated_mean(kind, p0, p1, prev, hi)
    for i in range(k):
        m = 0.5 * (cents[i] + cents[i + 1]) + bias
        out[i] = m
        gap = merge_tol if i > 0 else 0.0
        if not (m > last + gap) or not (m < hi):
            ok = False
        if isnan(m):
            ok = False
        last = m
    return ok


def lloyd_step(int kind, double p0, double p1, double[::1] edges,
               double bias, double merge_tol=1e-9):
    cdef Py_ssize_t k = edges.shape[0]
    cdef double lo, hi
    _support(kind, p0, p1, &lo, &hi)
    out_arr = np.empty(k, dtype=np.float64)
    cents_arr = np.empty(k + 1, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double[::1] cents = cents_arr
    cdef bint ok
    if k > 0:
        ok = _step(kind, p0, p1, lo, hi, bias, merge_tol, k,
                   &edges[0], &cents[0], &out[0])
    else:
        ok = True
    return out_arr, bool(ok)


def lloyd_solve(int kind, double p0, double p1, double[::1] edges0,
                double bias, double tol, long max_iter, double merge_tol=1e-9):
    cdef Py_ssize_t k = edges0.shape[0]
    cdef double lo, hi
    _support(kind, p0, p1, &lo, &hi)
    edges_arr = np.array(edges0, dtype=np.float64, copy=True)
    new_arr = np.empty(k, dtype=np.float64)
    cents_arr = np.empty(k + 1, dtype=np.float64)
    cdef double[::1] edges = edges_arr
    cdef double[::1] new = new_arr
    cdef double[::1] cents = cents_arr
    cdef double residual = INFINITY
    cdef double r, d
    cdef long it = 0
    cdef Py_ssize_t i
    cdef bint ok
    cdef int status = _STATUS_MAX_ITERATIONS
    if k == 0:
        return edges_arr, 0, 0.0, _STATUS_CONVERGED
    with nogil:
        while it < max_iter:
            it += 1
            ok = _step(kind, p0, p1, lo, hi, bias, merge_tol, k,
                       &edges[0], &cents[0], &new[0])
            if not ok:
                status = _STATUS_COLLAPSED
                break
            r = 0.0
            for i in range(k):
                d = fabs(new[i] - edges[i])
                if d > r:
                    r = d
                edges[i] = new[i]
            residual = r
            if residual <= tol:
                status = _STATUS_CONVERGED
                break
    return edges_arr, it, residual, status
