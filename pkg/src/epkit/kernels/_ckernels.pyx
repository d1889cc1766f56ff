# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Mirrors ``_pykernels`` one-for-one."""
import numpy as np
cimport cython
from libc.math cimport cos, sin, exp, sqrt


def kron(double complex[:, ::1] a, double complex[:, ::1] b):
    cdef Py_ssize_t ra = a.shape[0], ca = a.shape[1]
    cdef Py_ssize_t rb = b.shape[0], cb = b.shape[1]
    cdef Py_ssize_t i, j, k, l, row
    cdef double complex aij
    out_arr = np.empty((ra * rb, ca * cb), dtype=np.complex128)
    cdef double complex[:, ::1] out = out_arr
    for i in range(ra):
        for k in range(rb):
            row = i * rb + k
            for j in range(ca):
                aij = a[i, j]
                for l in range(cb):
                    out[row, j * cb + l] = aij * b[k, l]
    return out_arr


def kron_sum(double complex[:, ::1] a, double complex[:, ::1] b):
    cdef Py_ssize_t ma = a.shape[0], mb = b.shape[0]
    cdef Py_ssize_t i, j, k
    out_arr = np.zeros((ma * mb, ma * mb), dtype=np.complex128)
    cdef double complex[:, ::1] out = out_arr
    # a (x) 1_b: a[i, j] on the diagonal of block (i, j)
    for i in range(ma):
        for j in range(ma):
            for k in range(mb):
                out[i * mb + k, j * mb + k] += a[i, j]
    # 1_a (x) b: b repeated on the block diagonal
    for i in range(ma):
        for j in range(mb):
            for k in range(mb):
                out[i * mb + j, i * mb + k] += b[j, k]
    return out_arr


def nilpotent_trace(krylov, double complex e_ep, times):
    cdef double[:, :, ::1] kv = np.ascontiguousarray(krylov, dtype=np.complex128).view(
        np.float64).reshape(krylov.shape[0], krylov.shape[1], 2)
    cdef double[::1] ts = np.ascontiguousarray(times, dtype=np.float64)
    cdef Py_ssize_t order = kv.shape[0], m = kv.shape[1], nt = ts.shape[0]
    cdef Py_ssize_t it, j, k
    cdef double t, mag, arg, cr, ci, tmp, pr, pi, sr, si
    cdef double er = e_ep.real, ei = e_ep.imag
    out_arr = np.zeros((nt, m), dtype=np.complex128)
    cdef double[:, :, ::1] out = out_arr.view(np.float64).reshape(nt, m, 2)
    for it in range(nt):
        t = ts[it]
        cr = 1.0
        ci = 0.0
        for j in range(order):
            if j > 0:
                # coef *= -i t / j
                tmp = cr
                cr = ci * t / j
                ci = -tmp * t / j
            for k in range(m):
                out[it, k, 0] += cr * kv[j, k, 0] - ci * kv[j, k, 1]
                out[it, k, 1] += cr * kv[j, k, 1] + ci * kv[j, k, 0]
        # exp(-i e t) = exp(Im(e) t) * (cos(Re(e) t) - i sin(Re(e) t))
        mag = exp(ei * t)
        arg = er * t
        pr = mag * cos(arg)
        pi = -mag * sin(arg)
        for k in range(m):
            sr = out[it, k, 0]
            si = out[it, k, 1]
            out[it, k, 0] = pr * sr - pi * si
            out[it, k, 1] = pr * si + pi * sr
    return out_arr


def concurrence_rows(states):
    cdef double complex[:, ::1] s = np.ascontiguousarray(states, dtype=np.complex128)
    cdef Py_ssize_t nt = s.shape[0], it, k
    cdef double norm2
    cdef double complex det
    out_arr = np.empty(nt, dtype=np.float64)
    cdef double[::1] out = out_arr
    for it in range(nt):
        norm2 = 0.0
        for k in range(4):
            norm2 += s[it, k].real * s[it, k].real + s[it, k].imag * s[it, k].imag
        det = s[it, 0] * s[it, 3] - s[it, 1] * s[it, 2]
        out[it] = 2.0 * sqrt(det.real * det.real + det.imag * det.imag) / norm2
    return out_arr
