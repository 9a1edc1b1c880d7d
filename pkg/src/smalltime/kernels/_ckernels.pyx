# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled per-path loops. Must stay numerically in step with _pykernels."""

import numpy as np
from libc.math cimport exp, log, sqrt, sin, cos, pow, atan, tan, M_PI


def heston_terminal(double s0, double v0, double kappa, double theta, double xi,
                    double rho, double dt, const double[:, ::1] zv, const double[:, ::1] zp):
    cdef Py_ssize_t n = zv.shape[0], m = zv.shape[1], i, k
    cdef double rho_perp = sqrt(1.0 - rho * rho), sdt = sqrt(dt)
    cdef double v, vp, lns, w, zs, sv
    s_out = np.empty(n)
    w_out = np.empty(n)
    cdef double[::1] s_view = s_out, w_view = w_out
    for i in range(n):
        v = v0
        lns = 0.0
        w = 0.0
        for k in range(m):
            vp = v if v > 0.0 else 0.0
            zs = rho * zv[i, k] + rho_perp * zp[i, k]
            sv = sqrt(vp * dt)
            lns = lns + (-0.5 * vp * dt + sv * zs)
            w = w + sdt * zs
            v = v + kappa * (theta - vp) * dt + xi * sv * zv[i, k]
        s_view[i] = s0 * exp(lns)
        w_view[i] = w
    return s_out, w_out


def sde_euler(double s0, double a, double b, const double[:, ::1] dl):
    cdef Py_ssize_t n = dl.shape[0], m = dl.shape[1], i, k
    cdef double s
    out = np.empty(n)
    cdef double[::1] view = out
    for i in range(n):
        s = s0
        for k in range(m):
            s = s + (a * s + b) * dl[i, k]
        view[i] = s
    return out


def stable_cms(double alpha, double beta, const double[::1] v, const double[::1] w):
    cdef Py_ssize_t n = v.shape[0], i
    cdef double t = tan(M_PI * alpha / 2.0)
    cdef double shift = atan(beta * t) / alpha
    cdef double amp = pow(1.0 + beta * beta * t * t, 1.0 / (2.0 * alpha))
    cdef double e = (1.0 - alpha) / alpha
    cdef double inv = 1.0 / alpha
    cdef double x
    out = np.empty(n)
    cdef double[::1] view = out
    for i in range(n):
        x = alpha * (v[i] + shift)
        # one exp and two logs are cheaper than two calls to pow
        view[i] = amp * sin(x) * exp(e * log(cos(v[i] - x) / w[i]) - inv * log(cos(v[i])))
    return out
