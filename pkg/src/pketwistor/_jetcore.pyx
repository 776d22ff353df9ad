# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled truncated product for batches of jets."""

import numpy as np


def mul_flat(const double[:, ::1] a, const double[:, ::1] b,
             const int[::1] pi, const int[::1] pj, const int[::1] pk, int size):
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t npairs = pi.shape[0]
    cdef Py_ssize_t s, t
    out = np.zeros((n, size))
    cdef double[:, ::1] c = out
    with nogil:
        for s in range(n):
            for t in range(npairs):
                c[s, pk[t]] += a[s, pi[t]] * b[s, pj[t]]
    return out
