# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels mirroring the contracts of ``_fallback``.

Results agree with the NumPy backend up to floating-point reassociation noise
(different summation order); within one backend everything is deterministic.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, sqrt

cnp.import_array()

BACKEND = "native"


def cosine_pairs(a, b):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] aa = np.ascontiguousarray(a, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] bb = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t n = aa.shape[0], d = aa.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dots = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] na = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] nb = np.empty(n, dtype=np.float64)
    cdef Py_ssize_t i, j
    cdef double sd, sa, sb, x, y
    for i in range(n):
        sd = 0.0
        sa = 0.0
        sb = 0.0
        for j in range(d):
            x = aa[i, j]
            y = bb[i, j]
            sd += x * y
            sa += x * x
            sb += y * y
        dots[i] = sd
        na[i] = sa
        nb[i] = sb
    return dots, na, nb


def assign_nearest(points, centroids):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] x = np.ascontiguousarray(points, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] c = np.ascontiguousarray(centroids, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0], d = x.shape[1], k = c.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] labels = np.empty(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] c_sq = np.empty(k, dtype=np.float64)
    cdef Py_ssize_t i, j, m
    cdef double acc, best, dist
    cdef Py_ssize_t best_j
    for j in range(k):
        acc = 0.0
        for m in range(d):
            acc += c[j, m] * c[j, m]
        c_sq[j] = acc
    for i in range(n):
        best = 0.0
        best_j = 0
        for j in range(k):
            # same expansion as the fallback: ||c||^2 - 2 x.c (||x||^2 constant)
            acc = 0.0
            for m in range(d):
                acc += x[i, m] * c[j, m]
            dist = c_sq[j] - 2.0 * acc
            if j == 0 or dist < best:
                best = dist
                best_j = j
        labels[i] = best_j
    return labels


def centroid_sums(points, labels, Py_ssize_t k):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] x = np.ascontiguousarray(points, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] lab = np.ascontiguousarray(labels, dtype=np.int64)
    cdef Py_ssize_t n = x.shape[0], d = x.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] sums = np.zeros((k, d), dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] counts = np.zeros(k, dtype=np.int64)
    cdef Py_ssize_t i, j
    cdef Py_ssize_t c
    for i in range(n):
        c = lab[i]
        counts[c] += 1
        for j in range(d):
            sums[c, j] += x[i, j]
    return sums, counts


def min_sq_dist_update(points, centroid, d2):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] x = np.ascontiguousarray(points, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] c = np.ascontiguousarray(centroid, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = d2
    cdef Py_ssize_t n = x.shape[0], d = x.shape[1]
    cdef Py_ssize_t i, j
    cdef double acc, diff
    for i in range(n):
        acc = 0.0
        for j in range(d):
            diff = x[i, j] - c[j]
            acc += diff * diff
        if acc < out[i]:
            out[i] = acc


def logistic_epoch(x, y, order, w, double bias, double lr0, double l2, long long t):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] xx = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] yy = np.ascontiguousarray(y, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] idx = np.ascontiguousarray(order, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ww = w
    cdef Py_ssize_t d = xx.shape[1], m = idx.shape[0]
    cdef Py_ssize_t p, j
    cdef Py_ssize_t i
    cdef double z, sigma, g, lr, ez
    for p in range(m):
        i = idx[p]
        z = bias
        for j in range(d):
            z += ww[j] * xx[i, j]
        if z >= 0.0:
            sigma = 1.0 / (1.0 + exp(-z))
        else:
            ez = exp(z)
            sigma = ez / (1.0 + ez)
        g = sigma - yy[i]
        lr = lr0 / sqrt(<double> t)
        for j in range(d):
            ww[j] -= lr * (g * xx[i, j] + l2 * ww[j])
        bias -= lr * g
        t += 1
    return bias, t
