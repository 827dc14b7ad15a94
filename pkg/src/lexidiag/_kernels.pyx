# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-generation kernels: lexicase selection and point mutation.

Mirrors lexidiag._kernels_py draw for draw. The xoshiro256** generator is
re-implemented here in C; state is read from the RandomSource object before a
kernel runs and written back afterwards, so Python-side draws and kernel draws
form one continuous stream. Any change to the draw order here must be made in
_kernels_py as well (and vice versa) — the byte-identical-output tests in
tests/test_engine_parity.py enforce this.
"""

import numpy as np

from libc.stdint cimport uint64_t
from libc.math cimport sqrt, log, cos

ENGINE = "compiled"

cdef double INV_2_53 = 1.0 / 9007199254740992.0
cdef double TAU = 6.283185307179586


cdef struct XoState:
    uint64_t s0
    uint64_t s1
    uint64_t s2
    uint64_t s3


cdef inline uint64_t _rotl(uint64_t x, int k) nogil:
    return (x << k) | (x >> (64 - k))


cdef inline uint64_t _next64(XoState *st) nogil:
    cdef uint64_t x = st.s1 * <uint64_t>5
    cdef uint64_t result = _rotl(x, 7) * <uint64_t>9
    cdef uint64_t t = st.s1 << 17
    st.s2 ^= st.s0
    st.s3 ^= st.s1
    st.s1 ^= st.s2
    st.s0 ^= st.s3
    st.s2 ^= t
    st.s3 = _rotl(st.s3, 45)
    return result


cdef inline double _random(XoState *st) nogil:
    return <double>(_next64(st) >> 11) * INV_2_53


cdef inline uint64_t _randbelow(XoState *st, uint64_t n) nogil:
    # Masked rejection; must match RandomSource.randbelow (n == 1 draws nothing).
    cdef uint64_t mask, r
    if n == 1:
        return 0
    mask = 1
    while mask < n - 1:
        mask = (mask << 1) | <uint64_t>1
    while True:
        r = _next64(st) & mask
        if r < n:
            return r


cdef inline double _gauss(XoState *st) nogil:
    cdef double u1 = 1.0 - _random(st)
    cdef double u2 = _random(st)
    return sqrt(-2.0 * log(u1)) * cos(TAU * u2)


cdef inline XoState _load(object rng):
    cdef XoState st
    st.s0 = rng.s0
    st.s1 = rng.s1
    st.s2 = rng.s2
    st.s3 = rng.s3
    return st


cdef inline void _store(object rng, XoState st):
    rng.s0 = st.s0
    rng.s1 = st.s1
    rng.s2 = st.s2
    rng.s3 = st.s3


def select_parents(double[:, ::1] traits, Py_ssize_t[::1] case_to_trait,
                   Py_ssize_t count, object rng):
    """count independent lexicase selection events; returns an intp array."""
    cdef Py_ssize_t n = traits.shape[0]
    cdef Py_ssize_t n_cases = case_to_trait.shape[0]
    out_arr = np.empty(count, dtype=np.intp)
    order_arr = np.empty(n_cases, dtype=np.intp)
    pool_arr = np.empty(n, dtype=np.intp)
    cdef Py_ssize_t[::1] out = out_arr
    cdef Py_ssize_t[::1] order = order_arr
    cdef Py_ssize_t[::1] pool = pool_arr
    cdef XoState st = _load(rng)
    cdef Py_ssize_t k, i, j, c, t, pool_size, kept
    cdef uint64_t jdraw
    cdef double best, v
    with nogil:
        for k in range(count):
            for i in range(n_cases):
                order[i] = i
            # Fisher-Yates, descending, identical to RandomSource.shuffle.
            for i in range(n_cases - 1, 0, -1):
                jdraw = _randbelow(&st, <uint64_t>(i + 1))
                j = <Py_ssize_t>jdraw
                t = order[i]
                order[i] = order[j]
                order[j] = t
            pool_size = n
            for i in range(n):
                pool[i] = i
            for c in range(n_cases):
                if pool_size == 1:
                    break
                t = case_to_trait[order[c]]
                best = traits[pool[0], t]
                for i in range(1, pool_size):
                    v = traits[pool[i], t]
                    if v > best:
                        best = v
                kept = 0
                for i in range(pool_size):
                    if traits[pool[i], t] == best:
                        pool[kept] = pool[i]
                        kept += 1
                pool_size = kept
            if pool_size > 1:
                out[k] = pool[<Py_ssize_t>_randbelow(&st, <uint64_t>pool_size)]
            else:
                out[k] = pool[0]
    _store(rng, st)
    return out_arr


def mutate_batch(double[:, ::1] genes, double rate, double mean, double sd,
                 double upper, object rng):
    """Point-mutate a gene matrix; abs-value and reflection keep genes in range."""
    out_arr = np.array(genes, dtype=np.float64, copy=True)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t n = out.shape[0]
    cdef Py_ssize_t d = out.shape[1]
    cdef XoState st = _load(rng)
    cdef Py_ssize_t r, c
    cdef double z, v
    with nogil:
        for r in range(n):
            for c in range(d):
                if _random(&st) < rate:
                    z = _gauss(&st)
                    v = out[r, c] + (mean + sd * z)
                    while v < 0.0 or v > upper:
                        if v < 0.0:
                            v = -v
                        else:
                            v = upper - (v - upper)
                    out[r, c] = v
    _store(rng, st)
    return out_arr
