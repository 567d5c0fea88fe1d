# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels; see ``_kernels_py`` for the reference semantics."""

import numpy as np
from libc.math cimport sqrt, copysign


def qr_project(x, y):
    """Householder thin QR of ``x``; returns ``(R, Q^T y)``."""
    cdef double[::1, :] a = np.array(x, dtype=np.float64, order="F", copy=True)
    cdef double[::1] b = np.array(y, dtype=np.float64, copy=True)
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t q = a.shape[1]
    cdef Py_ssize_t i, j, col
    cdef double norm, alpha, vnorm2, dot, scale
    if n < q:
        raise ValueError("qr_project needs rows >= cols")
    if b.shape[0] != n:
        raise ValueError("y length must equal rows of x")
    r_arr = np.zeros((q, q))
    cdef double[:, ::1] r = r_arr
    for j in range(q):
        norm = 0.0
        for i in range(j, n):
            norm += a[i, j] * a[i, j]
        norm = sqrt(norm)
        if norm > 0.0:
            alpha = -copysign(norm, a[j, j])
            a[j, j] -= alpha
            vnorm2 = 0.0
            for i in range(j, n):
                vnorm2 += a[i, j] * a[i, j]
            for col in range(j + 1, q):
                dot = 0.0
                for i in range(j, n):
                    dot += a[i, j] * a[i, col]
                scale = 2.0 * dot / vnorm2
                for i in range(j, n):
                    a[i, col] -= scale * a[i, j]
            dot = 0.0
            for i in range(j, n):
                dot += a[i, j] * b[i]
            scale = 2.0 * dot / vnorm2
            for i in range(j, n):
                b[i] -= scale * a[i, j]
            r[j, j] = alpha
        else:
            r[j, j] = 0.0
        for col in range(j + 1, q):
            r[j, col] = a[j, col]
    return r_arr, np.asarray(b[:q]).copy()


def tabulate_cells(ic, il, im, a, y, w, Py_ssize_t nc, Py_ssize_t nl, Py_ssize_t nm):
    cdef const long long[::1] vc = np.ascontiguousarray(ic, dtype=np.int64)
    cdef const long long[::1] vl = np.ascontiguousarray(il, dtype=np.int64)
    cdef const long long[::1] vm = np.ascontiguousarray(im, dtype=np.int64)
    cdef const long long[::1] va = np.ascontiguousarray(a, dtype=np.int64)
    cdef const double[::1] vy = np.ascontiguousarray(y, dtype=np.float64)
    cdef const double[::1] vw = np.ascontiguousarray(w, dtype=np.float64)
    n_c_arr = np.zeros(nc)
    n_lc1_arr = np.zeros((nc, nl))
    n_mlc0_arr = np.zeros((nc, nl, nm))
    n_mlc1_arr = np.zeros((nc, nl, nm))
    ysum_arr = np.zeros((nc, nl, nm))
    cdef double[::1] n_c = n_c_arr
    cdef double[:, ::1] n_lc1 = n_lc1_arr
    cdef double[:, :, ::1] n_mlc0 = n_mlc0_arr
    cdef double[:, :, ::1] n_mlc1 = n_mlc1_arr
    cdef double[:, :, ::1] ysum = ysum_arr
    cdef Py_ssize_t i, ci, li, mi
    cdef Py_ssize_t n = vc.shape[0]
    cdef double wi
    for i in range(n):
        ci = vc[i]
        li = vl[i]
        mi = vm[i]
        wi = vw[i]
        n_c[ci] += wi
        if va[i] == 1:
            n_lc1[ci, li] += wi
            n_mlc1[ci, li, mi] += wi
            ysum[ci, li, mi] += wi * vy[i]
        else:
            n_mlc0[ci, li, mi] += wi
    return n_c_arr, n_lc1_arr, n_mlc0_arr, n_mlc1_arr, ysum_arr


def weighted_cell_sum(f_c, f_lc, f_mlc, y_mean):
    cdef const double[::1] vc = np.ascontiguousarray(f_c, dtype=np.float64)
    cdef const double[:, ::1] vl = np.ascontiguousarray(f_lc, dtype=np.float64)
    cdef const double[:, :, ::1] vm = np.ascontiguousarray(f_mlc, dtype=np.float64)
    cdef const double[:, :, ::1] vy = np.ascontiguousarray(y_mean, dtype=np.float64)
    cdef Py_ssize_t ci, li, mi
    cdef double wcl, wt, total = 0.0
    for ci in range(vm.shape[0]):
        for li in range(vm.shape[1]):
            wcl = vc[ci] * vl[ci, li]
            for mi in range(vm.shape[2]):
                wt = wcl * vm[ci, li, mi]
                if wt > 0.0:
                    total += wt * vy[ci, li, mi]
    return total
