# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-cell reaction substeps.

Same contracts as the numpy fallbacks in ``critfield.kernels``: in-place
updates, optional exact jacobian of the update map.
"""

from libc.math cimport sqrt

import numpy as np
cimport numpy as cnp

cnp.import_array()


def cubic_exact(double[:, ::1] u, double c, double[:, ::1] jac=None):
    """u <- u / sqrt(1 + c u^2); jac <- (1 + c u^2)^(-3/2)."""
    cdef Py_ssize_t i, j, ni = u.shape[0], nj = u.shape[1]
    cdef double den, rt
    cdef bint want = jac is not None
    for i in range(ni):
        for j in range(nj):
            den = 1.0 + c * u[i, j] * u[i, j]
            rt = sqrt(den)
            if want:
                jac[i, j] = 1.0 / (den * rt)
            u[i, j] = u[i, j] / rt


cdef inline double _poly(double u2, const double* c, Py_ssize_t k) noexcept nogil:
    cdef double acc = 0.0
    cdef Py_ssize_t idx = k
    while idx > 0:
        idx -= 1
        acc = acc * u2 + c[idx]
    return acc


def rk4_odd_poly(double[:, ::1] u, double[::1] b, double h, double[:, ::1] jac=None):
    """One RK4 step of du/dtau = -p(u), p(u) = sum b_k u^(2k+1), per cell."""
    cdef Py_ssize_t i, j, k, ni = u.shape[0], nj = u.shape[1], nb = b.shape[0]
    cdef bint want = jac is not None
    cdef bint any_nonzero = False
    for k in range(nb):
        if b[k] != 0.0:
            any_nonzero = True
            break
    if nb == 0 or not any_nonzero:
        if want:
            for i in range(ni):
                for j in range(nj):
                    jac[i, j] = 1.0
        return

    cdef double* bp
    cdef double* dp
    d_arr = np.empty(nb, dtype=np.float64)
    cdef double[::1] d = d_arr
    for k in range(nb):
        d[k] = b[k] * (2.0 * k + 1.0)
    bp = &b[0]
    dp = &d[0]

    cdef double x, v, k1, k2, k3, k4, a1, a2, a3, a4
    with nogil:
        for i in range(ni):
            for j in range(nj):
                x = u[i, j]
                k1 = _poly(x * x, bp, nb) * x
                if want:
                    a1 = _poly(x * x, dp, nb)
                v = x - 0.5 * h * k1
                k2 = _poly(v * v, bp, nb) * v
                if want:
                    a2 = _poly(v * v, dp, nb) * (1.0 - 0.5 * h * a1)
                v = x - 0.5 * h * k2
                k3 = _poly(v * v, bp, nb) * v
                if want:
                    a3 = _poly(v * v, dp, nb) * (1.0 - 0.5 * h * a2)
                v = x - h * k3
                k4 = _poly(v * v, bp, nb) * v
                if want:
                    a4 = _poly(v * v, dp, nb) * (1.0 - h * a3)
                    jac[i, j] = 1.0 - (h / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
                u[i, j] = x - (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
