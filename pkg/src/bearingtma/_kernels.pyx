# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_kernels_py``.

Single pass per sample, no temporaries; same signatures and results.
"""
import numpy as np
from libc.math cimport sin, cos, atan2, sqrt, INFINITY


cdef inline void _fill_row(int kind, int degree, double t, double[:] row) noexcept nogil:
    cdef int n
    row[0] = 1.0
    if degree == 0:
        return
    row[1] = 2.0 * t if kind == 1 else t
    for n in range(1, degree):
        if kind == 2:
            row[n + 1] = ((2 * n + 1) * t * row[n] - n * row[n - 1]) / (n + 1)
        else:
            row[n + 1] = 2.0 * t * row[n] - row[n - 1]


def basis_matrix(int kind, int degree, tau):
    cdef const double[:] tv = np.ascontiguousarray(tau, dtype=np.float64)
    cdef Py_ssize_t m = tv.shape[0], i
    out = np.empty((m, degree + 1))
    cdef double[:, :] ov = out
    with nogil:
        for i in range(m):
            _fill_row(kind, degree, tv[i], ov[i])
    return out


def basis_deriv_matrix(int kind, int degree, tau):
    cdef const double[:] tv = np.ascontiguousarray(tau, dtype=np.float64)
    cdef Py_ssize_t m = tv.shape[0], i
    cdef int n
    cdef double t
    val = np.empty((m, degree + 1))
    out = np.zeros((m, degree + 1))
    cdef double[:, :] vv = val
    cdef double[:, :] dv = out
    if degree == 0:
        return out
    with nogil:
        for i in range(m):
            t = tv[i]
            _fill_row(kind, degree, t, vv[i])
            dv[i, 1] = 2.0 if kind == 1 else 1.0
            for n in range(1, degree):
                if kind == 2:
                    dv[i, n + 1] = ((2 * n + 1) * (vv[i, n] + t * dv[i, n])
                                    - n * dv[i, n - 1]) / (n + 1)
                else:
                    dv[i, n + 1] = 2.0 * vv[i, n] + 2.0 * t * dv[i, n] - dv[i, n - 1]
    return out


def design_system(int kind, int degree, tau, beta, obs_x, obs_y):
    cdef const double[:] tv = np.ascontiguousarray(tau, dtype=np.float64)
    cdef const double[:] bv = np.ascontiguousarray(beta, dtype=np.float64)
    cdef const double[:] xv = np.ascontiguousarray(obs_x, dtype=np.float64)
    cdef const double[:] yv = np.ascontiguousarray(obs_y, dtype=np.float64)
    cdef Py_ssize_t m = tv.shape[0], i
    cdef int k, p = degree + 1
    cdef double c, s
    a = np.empty((m, 2 * p))
    rhs = np.empty(m)
    phi = np.empty(p)
    cdef double[:, :] av = a
    cdef double[:] rv = rhs
    cdef double[:] pv = phi
    with nogil:
        for i in range(m):
            _fill_row(kind, degree, tv[i], pv)
            c = cos(bv[i])
            s = sin(bv[i])
            for k in range(p):
                av[i, k] = pv[k] * c
                av[i, p + k] = -pv[k] * s
            rv[i] = xv[i] * c - yv[i] * s
    return a, rhs


def bearing_model(phi, coeffs_x, coeffs_y, obs_x, obs_y):
    cdef const double[:, :] fv = np.ascontiguousarray(phi, dtype=np.float64)
    cdef const double[:] ax = np.ascontiguousarray(coeffs_x, dtype=np.float64)
    cdef const double[:] ay = np.ascontiguousarray(coeffs_y, dtype=np.float64)
    cdef const double[:] xv = np.ascontiguousarray(obs_x, dtype=np.float64)
    cdef const double[:] yv = np.ascontiguousarray(obs_y, dtype=np.float64)
    cdef Py_ssize_t m = fv.shape[0], i
    cdef int k, p = fv.shape[1]
    cdef double dx, dy, r2, min_r2 = INFINITY
    pred = np.empty(m)
    jac = np.empty((m, 2 * p))
    cdef double[:] pr = pred
    cdef double[:, :] jv = jac
    with nogil:
        for i in range(m):
            dx = -xv[i]
            dy = -yv[i]
            for k in range(p):
                dx = dx + fv[i, k] * ax[k]
                dy = dy + fv[i, k] * ay[k]
            r2 = dx * dx + dy * dy
            if r2 < min_r2:
                min_r2 = r2
            pr[i] = atan2(dx, dy)
            for k in range(p):
                jv[i, k] = fv[i, k] * (dy / r2)
                jv[i, p + k] = fv[i, k] * (-dx / r2)
    return pred, jac, sqrt(min_r2)
