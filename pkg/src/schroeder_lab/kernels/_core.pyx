# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: series evaluation, sphere-normalized rational
iteration, escape-time classification and pullback evaluation of the
linearizing coordinate.  Mirrors schroeder_lab.kernels._fallback."""

import numpy as np

from libc.math cimport INFINITY
from libc.math cimport ceil as c_ceil
from libc.math cimport log as c_log

BACKEND_NAME = "cython"

ctypedef double complex cplx

cdef double _BIG = 1e100


cdef inline double _cabs(cplx z) nogil:
    return abs(z)


cdef inline cplx _horner(const cplx* c, Py_ssize_t n, cplx x) nogil:
    cdef cplx acc = c[n - 1]
    cdef Py_ssize_t i
    for i in range(n - 2, -1, -1):
        acc = acc * x + c[i]
    return acc


cdef inline void _step(const cplx* ph, const cplx* pr, const cplx* qh, const cplx* qr,
                       Py_ssize_t m, cplx* Z, cplx* W) nogil:
    # one homogeneous application; the common factor base^d cancels in the
    # renormalization and is never formed
    cdef cplx t, F, G
    cdef double norm
    if _cabs(Z[0]) <= _cabs(W[0]):
        t = Z[0] / W[0]
        F = _horner(ph, m, t)
        G = _horner(qh, m, t)
    else:
        t = W[0] / Z[0]
        F = _horner(pr, m, t)
        G = _horner(qr, m, t)
    norm = _cabs(F)
    if _cabs(G) > norm:
        norm = _cabs(G)
    if norm == 0.0:
        Z[0] = 1.0
        W[0] = 0.0
    else:
        Z[0] = F / norm
        W[0] = G / norm


def series_eval(const cplx[::1] coeffs, const cplx[::1] w):
    out = np.empty(w.shape[0], dtype=np.complex128)
    cdef cplx[::1] ov = out
    cdef Py_ssize_t i, n = w.shape[0], nc = coeffs.shape[0]
    with nogil:
        for i in range(n):
            ov[i] = _horner(&coeffs[0], nc, w[i])
    return out


def rat_iterate(const cplx[::1] ph, const cplx[::1] pr,
                const cplx[::1] qh, const cplx[::1] qr,
                cplx[::1] Z, cplx[::1] W, int steps):
    cdef Py_ssize_t i, n = Z.shape[0], m = ph.shape[0]
    cdef int s
    with nogil:
        for i in range(n):
            for s in range(steps):
                _step(&ph[0], &pr[0], &qh[0], &qr[0], m, &Z[i], &W[i])


def pullback_eval(const cplx[::1] coeffs, cplx lam, double r_safe,
                  const cplx[::1] ph, const cplx[::1] pr,
                  const cplx[::1] qh, const cplx[::1] qr,
                  int p, const cplx[::1] w):
    out = np.empty(w.shape[0], dtype=np.complex128)
    cdef cplx[::1] ov = out
    cdef Py_ssize_t i, n = w.shape[0], m = ph.shape[0], nc = coeffs.shape[0]
    cdef double llam = c_log(_cabs(lam))
    cdef cplx invlam = 1.0 / lam
    cdef cplx u, Z, W
    cdef double aw
    cdef int k, j, steps
    with nogil:
        for i in range(n):
            aw = _cabs(w[i])
            k = 0
            if aw > r_safe:
                k = <int>c_ceil(c_log(aw / r_safe) / llam)
                if k < 0:
                    k = 0
            u = w[i]
            for j in range(k):
                u = u * invlam
            Z = _horner(&coeffs[0], nc, u)
            W = 1.0
            steps = k * p
            for j in range(steps):
                _step(&ph[0], &pr[0], &qh[0], &qr[0], m, &Z, &W)
            if _cabs(W) * 1e280 <= _cabs(Z):
                ov[i] = INFINITY
            else:
                ov[i] = Z / W
    return out


def pullback_log_abs(const cplx[::1] coeffs, cplx lam, double r_safe,
                     const cplx[::1] fc, int p, const cplx[::1] w):
    out = np.empty(w.shape[0], dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i, n = w.shape[0], m = fc.shape[0], nc = coeffs.shape[0]
    cdef double llam = c_log(_cabs(lam))
    cdef double llead = c_log(_cabs(fc[m - 1]))
    cdef double dd = <double>(m - 1)
    cdef cplx invlam = 1.0 / lam
    cdef cplx u, z
    cdef double aw, L, az
    cdef int k, j, steps
    cdef bint inlog
    with nogil:
        for i in range(n):
            aw = _cabs(w[i])
            k = 0
            if aw > r_safe:
                k = <int>c_ceil(c_log(aw / r_safe) / llam)
                if k < 0:
                    k = 0
            u = w[i]
            for j in range(k):
                u = u * invlam
            z = _horner(&coeffs[0], nc, u)
            steps = k * p
            inlog = 0
            L = 0.0
            for j in range(steps):
                if inlog:
                    L = dd * L + llead
                else:
                    z = _horner(&fc[0], m, z)
                    az = _cabs(z)
                    if az > _BIG:
                        L = c_log(az)
                        inlog = 1
            if not inlog:
                az = _cabs(z)
                if az < 1e-300:
                    az = 1e-300
                L = c_log(az)
            ov[i] = L
    return out


def escape_time(const cplx[::1] fc, const cplx[::1] z0, int max_iter, double radius):
    out = np.empty(z0.shape[0], dtype=np.int32)
    cdef int[::1] ov = out
    cdef Py_ssize_t i, n = z0.shape[0], m = fc.shape[0]
    cdef cplx z
    cdef double az2, r2 = radius * radius
    cdef int k, hit
    with nogil:
        for i in range(n):
            z = z0[i]
            az2 = z.real * z.real + z.imag * z.imag
            if az2 != az2 or az2 > r2:
                ov[i] = 0
                continue
            hit = -1
            for k in range(1, max_iter + 1):
                z = _horner(&fc[0], m, z)
                az2 = z.real * z.real + z.imag * z.imag
                if az2 != az2 or az2 > r2:
                    hit = k
                    break
            ov[i] = hit
    return out


def power_escape(int d, const cplx[::1] cs, int max_iter, double radius):
    out = np.empty(cs.shape[0], dtype=np.int32)
    cdef int[::1] ov = out
    cdef Py_ssize_t i, n = cs.shape[0]
    cdef cplx z, acc, c
    cdef double az2, r2 = radius * radius
    cdef int k, j, hit
    with nogil:
        for i in range(n):
            c = cs[i]
            z = 0.0
            hit = -1
            for k in range(1, max_iter + 1):
                acc = z
                for j in range(d - 1):
                    acc = acc * z
                z = acc + c
                az2 = z.real * z.real + z.imag * z.imag
                if az2 != az2 or az2 > r2:
                    hit = k
                    break
            ov[i] = hit
    return out
