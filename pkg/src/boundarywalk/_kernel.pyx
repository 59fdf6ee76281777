# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled sampling hot kernel: counter-based RNG + inverse-CDF index draws.

Bit-identical to boundarywalk._kernel_py; see that module for the contract.
"""

from libc.stdint cimport uint64_t, int64_t

import numpy as np

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15U
cdef double INV53 = 1.0 / 9007199254740992.0  # 2**-53


cdef inline uint64_t _finalize(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9U
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBU
    return z ^ (z >> 31)


def stream_key(seed, stream):
    cdef uint64_t s = <uint64_t> (seed & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t t = <uint64_t> (stream & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t z = _finalize(s ^ 0x6A09E667F3BCC909U)
    return int(_finalize(z + t * GOLDEN))


def uniform(key, counter):
    cdef uint64_t k = <uint64_t> (key & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t c = <uint64_t> (counter & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t z = _finalize(k + (c + 1) * GOLDEN)
    return (z >> 11) * INV53


def fill_uniforms(key, counters):
    cdef uint64_t k = <uint64_t> (key & 0xFFFFFFFFFFFFFFFF)
    ctr_arr = np.ascontiguousarray(counters, dtype=np.uint64)
    cdef uint64_t[::1] ctr = ctr_arr
    cdef Py_ssize_t n = ctr.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    cdef uint64_t z
    with nogil:
        for i in range(n):
            z = _finalize(k + (ctr[i] + 1) * GOLDEN)
            out[i] = (z >> 11) * INV53
    return out_arr


def sample_indices(key, counters, cdf):
    cdef uint64_t k = <uint64_t> (key & 0xFFFFFFFFFFFFFFFF)
    ctr_arr = np.ascontiguousarray(counters, dtype=np.uint64)
    cdf_arr = np.ascontiguousarray(cdf, dtype=np.float64)
    cdef uint64_t[::1] ctr = ctr_arr
    cdef double[::1] c = cdf_arr
    cdef Py_ssize_t n = ctr.shape[0]
    cdef Py_ssize_t m = c.shape[0]
    out_arr = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] out = out_arr
    cdef Py_ssize_t i, lo, hi, mid
    cdef uint64_t z
    cdef double u
    with nogil:
        for i in range(n):
            z = _finalize(k + (ctr[i] + 1) * GOLDEN)
            u = (z >> 11) * INV53
            # upper bound: first index with c[idx] > u (searchsorted side="right")
            lo = 0
            hi = m
            while lo < hi:
                mid = (lo + hi) >> 1
                if c[mid] <= u:
                    lo = mid + 1
                else:
                    hi = mid
            if lo >= m:
                lo = m - 1
            out[i] = lo
    return out_arr
