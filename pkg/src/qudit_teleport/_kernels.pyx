# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Same contracts as ``_kernels_py``."""
import numpy as np
cimport cython


def branch_fidelity_sum(const double complex[:, ::1] psi,
                        const double complex[:, :, ::1] branches,
                        const double complex[:, :, ::1] corrections):
    cdef Py_ssize_t T = branches.shape[0], B = branches.shape[1], d = branches.shape[2]
    cdef Py_ssize_t t, b, i, j
    cdef double complex acc, row, ov
    cdef double total
    out = np.empty(T, dtype=np.float64)
    cdef double[::1] res = out
    with nogil:
        for t in range(T):
            total = 0.0
            for b in range(B):
                ov = 0.0
                for i in range(d):
                    row = 0.0
                    for j in range(d):
                        row = row + corrections[b, i, j] * branches[t, b, j]
                    ov = ov + psi[t, i].conjugate() * row
                total = total + ov.real * ov.real + ov.imag * ov.imag
            res[t] = total
    return out


cdef bint _cholesky_ok(double complex[:, ::1] a, Py_ssize_t d) noexcept nogil:
    # in-place lower Cholesky of a Hermitian matrix; false on a nonpositive pivot
    cdef Py_ssize_t i, j, k
    cdef double complex s
    cdef double piv
    for j in range(d):
        piv = a[j, j].real
        for k in range(j):
            piv -= a[j, k].real * a[j, k].real + a[j, k].imag * a[j, k].imag
        if not piv > 0.0:
            return False
        piv = piv ** 0.5
        a[j, j] = piv
        for i in range(j + 1, d):
            s = a[i, j]
            for k in range(j):
                s = s - a[i, k] * a[j, k].conjugate()
            a[i, j] = s / piv
    return True


def psd_mask(const double complex[:, ::1] gram, const double[:, ::1] p, double tol):
    cdef Py_ssize_t N = p.shape[0], d = gram.shape[0]
    cdef Py_ssize_t n, i, j
    out = np.empty(N, dtype=np.bool_)
    cdef unsigned char[::1] res = out.view(np.uint8)
    work = np.empty((d, d), dtype=np.complex128)
    cdef double complex[:, ::1] a = work
    with nogil:
        for n in range(N):
            for i in range(d):
                for j in range(d):
                    a[i, j] = gram[i, j]
                a[i, i] = a[i, i] - p[n, i] + tol
            res[n] = _cholesky_ok(a, d)
    return out
