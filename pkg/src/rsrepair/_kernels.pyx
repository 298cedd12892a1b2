# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; semantics match ``_kernels_py`` exactly."""

import numpy as np

ctypedef long long i64

cdef extern from *:
    int __builtin_clzll(unsigned long long x)


def rref(i64[:, ::1] a, const i64[:, ::1] mul, const i64[::1] inv, Py_ssize_t ncols=-1):
    cdef Py_ssize_t rows = a.shape[0], cols = a.shape[1]
    cdef Py_ssize_t r = 0, c, i, p, j
    cdef i64 piv, f, tmp
    if ncols < 0:
        ncols = cols
    pivots = []
    for c in range(ncols):
        if r == rows:
            break
        p = -1
        for i in range(r, rows):
            if a[i, c] != 0:
                p = i
                break
        if p < 0:
            continue
        if p != r:
            for j in range(cols):
                tmp = a[r, j]
                a[r, j] = a[p, j]
                a[p, j] = tmp
        piv = a[r, c]
        if piv != 1:
            f = inv[piv]
            for j in range(cols):
                a[r, j] = mul[f, a[r, j]]
        for i in range(rows):
            if i != r and a[i, c] != 0:
                f = a[i, c]
                for j in range(cols):
                    a[i, j] ^= mul[f, a[r, j]]
        pivots.append(c)
        r += 1
    return pivots


def rref_many(i64[:, :, ::1] a, const i64[:, ::1] mul, const i64[::1] inv):
    cdef Py_ssize_t i
    return [rref(a[i], mul, inv) for i in range(a.shape[0])]


def xor_rank(const i64[::1] codes):
    cdef i64 basis[64]
    cdef Py_ssize_t n = codes.shape[0], i, b
    cdef int rank = 0
    cdef i64 v
    for b in range(64):
        basis[b] = 0
    for i in range(n):
        v = codes[i]
        while v != 0:
            b = 63 - __builtin_clzll(<unsigned long long>v)
            if basis[b] == 0:
                basis[b] = v
                rank += 1
                break
            v ^= basis[b]
    return rank


def horner(const i64[::1] coeffs, xs, const i64[::1] log, const i64[::1] exp, i64 order):
    cdef const i64[::1] x = np.ascontiguousarray(xs, dtype=np.int64)
    cdef Py_ssize_t n = x.shape[0], m = coeffs.shape[0], i, d
    out_arr = np.zeros(n, dtype=np.int64)
    lx_arr = np.full(n, -1, dtype=np.int64)
    cdef i64[::1] out = out_arr
    cdef i64[::1] lx = lx_arr
    cdef i64 c, acc
    for i in range(n):
        if x[i] != 0:
            lx[i] = log[x[i]]
    # coefficient-major: the lookups for different points are independent,
    # which keeps the table reads pipelined
    for d in range(m - 1, -1, -1):
        c = coeffs[d]
        for i in range(n):
            acc = out[i]
            if acc != 0:
                acc = exp[log[acc] + lx[i]] if lx[i] >= 0 else 0
            out[i] = acc ^ c
    return out_arr


def power_sums(v, xs, Py_ssize_t k, const i64[::1] log, const i64[::1] exp, i64 order):
    cdef const i64[::1] vv = np.ascontiguousarray(v, dtype=np.int64)
    cdef const i64[::1] x = np.ascontiguousarray(xs, dtype=np.int64)
    cdef Py_ssize_t n = vv.shape[0], j, d
    out_arr = np.zeros(k, dtype=np.int64)
    cdef i64[::1] out = out_arr
    cdef i64 lv, lx, e
    if k == 0:
        return out_arr
    for j in range(n):
        if vv[j] == 0:
            continue
        out[0] ^= vv[j]
        if x[j] == 0:
            continue
        lv = log[vv[j]]
        lx = log[x[j]]
        e = lv
        for d in range(1, k):
            e += lx
            if e >= order:
                e -= order
            out[d] ^= exp[e]
    return out_arr
