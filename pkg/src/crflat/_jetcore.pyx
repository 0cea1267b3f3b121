# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled kernels for truncated multivariate series.

Every routine takes a ``JetSpace`` (for its precomputed pair tables) and
dense coefficient arrays in graded order.  Array dtypes must agree; the
caller in :mod:`crflat.jet` promotes before dispatching.
"""

import numpy as np

ctypedef double complex complex_t

ctypedef fused scalar_t:
    double
    complex_t


cdef void _mul(const scalar_t[::1] a, const scalar_t[::1] b, scalar_t[::1] out,
               const Py_ssize_t[::1] I, const Py_ssize_t[::1] J,
               const Py_ssize_t[::1] K) noexcept nogil:
    cdef Py_ssize_t p
    cdef Py_ssize_t n = out.shape[0]
    cdef Py_ssize_t npairs = I.shape[0]
    for p in range(n):
        out[p] = 0
    for p in range(npairs):
        out[K[p]] += a[I[p]] * b[J[p]]


cdef void _div(const scalar_t[::1] a, const scalar_t[::1] b, scalar_t[::1] out,
               const Py_ssize_t[::1] I, const Py_ssize_t[::1] J,
               const Py_ssize_t[::1] kstart) noexcept nogil:
    # pairs are sorted by target index, so out[i] is final before it is read
    cdef Py_ssize_t k, p, i
    cdef Py_ssize_t n = out.shape[0]
    cdef scalar_t s
    cdef scalar_t b0 = b[0]
    for k in range(n):
        s = a[k]
        for p in range(kstart[k], kstart[k + 1]):
            i = I[p]
            if i != k:
                s = s - out[i] * b[J[p]]
        out[k] = s / b0


cdef void _compose(const scalar_t[::1] coefs, const scalar_t[::1] h,
                   scalar_t[::1] out, scalar_t[::1] tmp,
                   const Py_ssize_t[::1] I, const Py_ssize_t[::1] J,
                   const Py_ssize_t[::1] K) noexcept nogil:
    cdef Py_ssize_t p, k
    cdef Py_ssize_t n = out.shape[0]
    cdef Py_ssize_t m = coefs.shape[0] - 1
    for p in range(n):
        out[p] = 0
    out[0] = coefs[m]
    for k in range(m - 1, -1, -1):
        _mul(out, h, tmp, I, J, K)
        for p in range(n):
            out[p] = tmp[p]
        out[0] += coefs[k]


def mul(space, a, b):
    out = np.empty_like(a)
    if a.dtype == np.complex128:
        _mul[complex_t](a, b, out, space.pair_i, space.pair_j, space.pair_k)
    else:
        _mul[double](a, b, out, space.pair_i, space.pair_j, space.pair_k)
    return out


def div(space, a, b):
    out = np.empty_like(a)
    if a.dtype == np.complex128:
        _div[complex_t](a, b, out, space.pair_i, space.pair_j, space.pair_kstart)
    else:
        _div[double](a, b, out, space.pair_i, space.pair_j, space.pair_kstart)
    return out


def compose(space, coefs, h):
    out = np.empty_like(h)
    tmp = np.empty_like(h)
    if h.dtype == np.complex128:
        _compose[complex_t](coefs, h, out, tmp, space.pair_i, space.pair_j, space.pair_k)
    else:
        _compose[double](coefs, h, out, tmp, space.pair_i, space.pair_j, space.pair_k)
    return out
