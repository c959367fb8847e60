# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled permanent kernels (Glynn formula, Gray-code order)."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef double complex _glynn(double complex[:, ::1] a, double complex[::1] colsum,
                           signed char[::1] delta) noexcept nogil:
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t i, j
    cdef long long k, count, bits
    cdef double complex total, prod
    cdef double sign = 1.0
    cdef double step

    if n == 0:
        return 1.0
    for j in range(n):
        colsum[j] = 0.0
        for i in range(n):
            colsum[j] = colsum[j] + a[i, j]
    for i in range(n):
        delta[i] = 1

    prod = 1.0
    for j in range(n):
        prod = prod * colsum[j]
    total = prod

    count = (<long long> 1) << (n - 1)
    for k in range(1, count):
        # row flipped between consecutive Gray codes = trailing zeros of k; row 0 stays fixed
        bits = k
        i = 1
        while (bits & 1) == 0:
            bits >>= 1
            i += 1
        delta[i] = -delta[i]
        step = 2.0 * delta[i]
        for j in range(n):
            colsum[j] = colsum[j] + step * a[i, j]
        sign = -sign
        prod = 1.0
        for j in range(n):
            prod = prod * colsum[j]
        total = total + sign * prod

    return total / <double> count


def permanent(a):
    """Permanent of a square complex matrix, O(n 2^n)."""
    cdef double complex[:, ::1] m = np.ascontiguousarray(a, dtype=np.complex128)
    if m.shape[0] != m.shape[1]:
        raise ValueError("permanent requires a square matrix")
    cdef Py_ssize_t n = m.shape[0]
    cdef double complex[::1] colsum = np.empty(max(n, 1), dtype=np.complex128)
    cdef signed char[::1] delta = np.empty(max(n, 1), dtype=np.int8)
    return complex(_glynn(m, colsum, delta))


def ket_permanents(u, cols, outputs):
    """Permanents of the submatrices u[rows(out), cols] for every output ket.

    ``cols`` lists the input column of each photon (repeated by occupation);
    ``outputs`` is an (n_out, d) occupation array. Each output must carry
    ``len(cols)`` photons.
    """
    cdef double complex[:, ::1] um = np.ascontiguousarray(u, dtype=np.complex128)
    cdef cnp.int64_t[::1] c = np.ascontiguousarray(cols, dtype=np.int64)
    cdef cnp.int64_t[:, ::1] occ = np.ascontiguousarray(outputs, dtype=np.int64)
    cdef Py_ssize_t n = c.shape[0]
    cdef Py_ssize_t n_out = occ.shape[0]
    cdef Py_ssize_t d = occ.shape[1]
    cdef Py_ssize_t o, k, r, j, row
    cdef cnp.int64_t m
    out = np.empty(n_out, dtype=np.complex128)
    cdef double complex[::1] res = out
    cdef double complex[:, ::1] sub = np.empty((max(n, 1), max(n, 1)), dtype=np.complex128)
    cdef double complex[::1] colsum = np.empty(max(n, 1), dtype=np.complex128)
    cdef signed char[::1] delta = np.empty(max(n, 1), dtype=np.int8)

    with nogil:
        for o in range(n_out):
            row = 0
            for k in range(d):
                m = occ[o, k]
                for r in range(m):
                    if row < n:
                        for j in range(n):
                            sub[row, j] = um[k, c[j]]
                    row += 1
            if row != n:
                res[o] = 0.0
            elif n == 0:
                res[o] = 1.0
            else:
                res[o] = _glynn(sub, colsum, delta)
    return out
