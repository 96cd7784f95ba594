# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: Philox4x64-10, cyclic Jacobi, range coder.

Behavioral twin of _pure.py -- same operation order, same integer
semantics.  Keep the two files in sync.
"""

from libc.stdint cimport uint8_t, uint32_t, uint64_t, int64_t
from libc.stdlib cimport free, malloc, realloc
from libc.math cimport sqrt

import numpy as np

cdef extern from *:
    ctypedef unsigned long long uint128 "__uint128_t"

BACKEND_NAME = "cython"

cdef uint64_t _M0 = 0xD2E7470EE14C6C93ULL
cdef uint64_t _M1 = 0xCA5A826395121157ULL
cdef uint64_t _W0 = 0x9E3779B97F4A7C15ULL
cdef uint64_t _W1 = 0xBB67AE8584CAA73BULL


def philox_blocks(key0, key1, ctr_lo, ctr_stream):
    """Philox4x64-10 outputs for counter rows (ctr_lo[i], 0, ctr_stream[i], 0)."""
    cdef uint64_t[::1] clo = np.ascontiguousarray(ctr_lo, dtype=np.uint64)
    cdef uint64_t[::1] cst = np.ascontiguousarray(ctr_stream, dtype=np.uint64)
    cdef Py_ssize_t n = clo.shape[0]
    out_arr = np.empty((n, 4), dtype=np.uint64)
    cdef uint64_t[:, ::1] out = out_arr
    cdef uint64_t bk0 = <uint64_t> (int(key0) & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t bk1 = <uint64_t> (int(key1) & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t x0, x1, x2, x3, k0, k1, hi0, lo0, hi1, lo1
    cdef uint128 p
    cdef Py_ssize_t i
    cdef int rnd
    with nogil:
        for i in range(n):
            x0 = clo[i]
            x1 = 0
            x2 = cst[i]
            x3 = 0
            k0 = bk0
            k1 = bk1
            for rnd in range(10):
                if rnd:
                    k0 = k0 + _W0
                    k1 = k1 + _W1
                p = <uint128> _M0 * x0
                hi0 = <uint64_t> (p >> 64)
                lo0 = <uint64_t> p
                p = <uint128> _M1 * x2
                hi1 = <uint64_t> (p >> 64)
                lo1 = <uint64_t> p
                x0 = hi1 ^ x1 ^ k0
                x1 = lo1
                x2 = hi0 ^ x3 ^ k1
                x3 = lo0
            out[i, 0] = x0
            out[i, 1] = x1
            out[i, 2] = x2
            out[i, 3] = x3
    return out_arr


def jacobi_eig(a, tol=1e-14, max_sweeps=30):
    """Cyclic Jacobi diagonalization of a Hermitian complex matrix."""
    a_arr = np.array(a, dtype=np.complex128, copy=True, order="C")
    cdef Py_ssize_t n = a_arr.shape[0]
    v_arr = np.eye(n, dtype=np.complex128)
    cdef double complex[:, ::1] am = a_arr
    cdef double complex[:, ::1] vm = v_arr
    cdef double fro2 = 0.0, off2, diag2
    cdef Py_ssize_t i, j, p, q
    cdef double g, app, aqq, theta, t, c, s
    cdef double complex apq, ph, phc, sph, sphc, cp, cq
    cdef int sweeps = 0, sweep
    with nogil:
        for i in range(n):
            for j in range(n):
                fro2 += am[i, j].real * am[i, j].real + am[i, j].imag * am[i, j].imag
    if sqrt(fro2) == 0.0 or n == 1:
        return np.real(np.diag(a_arr)).copy(), v_arr, 0
    cdef double fro = sqrt(fro2)
    for sweep in range(max_sweeps):
        off2 = 0.0
        with nogil:
            for i in range(n):
                for j in range(n):
                    if i != j:
                        off2 += am[i, j].real * am[i, j].real + am[i, j].imag * am[i, j].imag
        if sqrt(max(off2, 0.0)) <= tol * fro:
            break
        sweeps += 1
        with nogil:
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = am[p, q]
                    g = sqrt(apq.real * apq.real + apq.imag * apq.imag)
                    if g == 0.0:
                        continue
                    ph = apq / g
                    phc = ph.conjugate()
                    app = am[p, p].real
                    aqq = am[q, q].real
                    theta = (aqq - app) / (2.0 * g)
                    if theta >= 0.0:
                        t = 1.0 / (theta + sqrt(theta * theta + 1.0))
                    else:
                        t = -1.0 / (-theta + sqrt(theta * theta + 1.0))
                    c = 1.0 / sqrt(t * t + 1.0)
                    s = t * c
                    sph = s * ph
                    sphc = s * phc
                    for i in range(n):
                        cp = am[i, p]
                        cq = am[i, q]
                        am[i, p] = c * cp - sphc * cq
                        am[i, q] = sph * cp + c * cq
                    for i in range(n):
                        cp = am[p, i]
                        cq = am[q, i]
                        am[p, i] = c * cp - sph * cq
                        am[q, i] = sphc * cp + c * cq
                    am[p, p] = app - t * g
                    am[q, q] = aqq + t * g
                    am[p, q] = 0.0
                    am[q, p] = 0.0
                    for i in range(n):
                        cp = vm[i, p]
                        cq = vm[i, q]
                        vm[i, p] = c * cp - sphc * cq
                        vm[i, q] = sph * cp + c * cq
    return np.real(np.diag(a_arr)).copy(), v_arr, sweeps


def fnv1a64(data):
    """64-bit FNV-1a over a bytes-like object."""
    cdef const uint8_t[::1] dv = bytes(data)
    cdef uint64_t h = 0xCBF29CE484222325ULL
    cdef Py_ssize_t i
    with nogil:
        for i in range(dv.shape[0]):
            h ^= dv[i]
            h *= 0x100000001B3ULL
    return int(h)


cdef uint64_t _RC_TOP = 1ULL << 32
cdef uint64_t _RC_BOT = 1ULL << 24


cdef struct _ByteBuf:
    uint8_t* data
    size_t len
    size_t cap


cdef inline int _buf_push(_ByteBuf* b, uint8_t byte) nogil except -1:
    cdef uint8_t* nd
    if b.len == b.cap:
        b.cap = b.cap * 2 if b.cap else 256
        nd = <uint8_t*> realloc(b.data, b.cap)
        if nd == NULL:
            with gil:
                raise MemoryError()
        b.data = nd
    b.data[b.len] = byte
    b.len += 1
    return 0


cdef inline void _buf_carry(_ByteBuf* b) nogil:
    cdef size_t i = b.len - 1
    while b.data[i] == 0xFF:
        b.data[i] = 0
        i -= 1
    b.data[i] += 1


def rc_encode(cum, offsets, model_ids, symbols):
    """Range-code `symbols`; symbol i uses frequency table model_ids[i]."""
    cdef uint32_t[::1] cumv = np.ascontiguousarray(cum, dtype=np.uint32)
    cdef int64_t[::1] offv = np.ascontiguousarray(offsets, dtype=np.int64)
    cdef int64_t[::1] midv = np.ascontiguousarray(model_ids, dtype=np.int64)
    cdef int64_t[::1] symv = np.ascontiguousarray(symbols, dtype=np.int64)
    cdef Py_ssize_t n = symv.shape[0]
    cdef _ByteBuf buf
    buf.cap = <size_t> (3 * n + 64)
    buf.len = 0
    buf.data = <uint8_t*> malloc(buf.cap)
    if buf.data == NULL:
        raise MemoryError()
    cdef uint64_t low = 0
    cdef uint64_t rng = _RC_TOP - 1
    cdef uint64_t r, clo, chi, total, x, step, cand
    cdef int64_t base, top, s
    cdef Py_ssize_t i
    cdef int k, kk, jj
    try:
        with nogil:
            for i in range(n):
                base = offv[midv[i]]
                top = offv[midv[i] + 1]
                total = cumv[top - 1]
                s = symv[i]
                clo = cumv[base + s]
                chi = cumv[base + s + 1]
                r = rng / total
                low += r * clo
                if chi == total:
                    rng -= r * clo
                else:
                    rng = r * (chi - clo)
                if low >= _RC_TOP:
                    _buf_carry(&buf)
                    low -= _RC_TOP
                while rng < _RC_BOT:
                    _buf_push(&buf, <uint8_t> ((low >> 24) & 0xFF))
                    low = (low << 8) & (_RC_TOP - 1)
                    rng <<= 8
            x = low
            k = 4
            for kk in range(4):
                step = 1ULL << (32 - 8 * kk)
                cand = ((low + step - 1) / step) * step
                if cand < low + rng:
                    x = cand
                    k = kk
                    break
            if x >= _RC_TOP:
                _buf_carry(&buf)
                x -= _RC_TOP
            for jj in range(k):
                _buf_push(&buf, <uint8_t> ((x >> (24 - 8 * jj)) & 0xFF))
        return bytes(buf.data[:buf.len])
    finally:
        free(buf.data)


def rc_decode(data, cum, offsets, model_ids):
    """Inverse of rc_encode; reads past-the-end bytes as zero."""
    cdef const uint8_t[::1] dv = data
    cdef uint32_t[::1] cumv = np.ascontiguousarray(cum, dtype=np.uint32)
    cdef int64_t[::1] offv = np.ascontiguousarray(offsets, dtype=np.int64)
    cdef int64_t[::1] midv = np.ascontiguousarray(model_ids, dtype=np.int64)
    cdef Py_ssize_t n = midv.shape[0]
    out_arr = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] out = out_arr
    cdef Py_ssize_t nd = dv.shape[0]
    cdef Py_ssize_t pos = 0
    cdef uint64_t code = 0
    cdef uint64_t rng = _RC_TOP - 1
    cdef uint64_t r, v, clo, chi, total
    cdef int64_t base, top, nsym, lo_i, hi_i, mid, s
    cdef Py_ssize_t i
    cdef int jj
    with nogil:
        for jj in range(4):
            code = (code << 8) | (dv[pos] if pos < nd else 0)
            pos += 1
        for i in range(n):
            base = offv[midv[i]]
            top = offv[midv[i] + 1]
            total = cumv[top - 1]
            nsym = top - base - 1
            r = rng / total
            v = code / r
            if v >= total:
                v = total - 1
            lo_i = 0
            hi_i = nsym
            while hi_i - lo_i > 1:
                mid = (lo_i + hi_i) >> 1
                if cumv[base + mid] <= v:
                    lo_i = mid
                else:
                    hi_i = mid
            s = lo_i
            clo = cumv[base + s]
            chi = cumv[base + s + 1]
            code -= r * clo
            if chi == total:
                rng -= r * clo
            else:
                rng = r * (chi - clo)
            while rng < _RC_BOT:
                code = ((code << 8) | (dv[pos] if pos < nd else 0)) & (_RC_TOP - 1)
                pos += 1
                rng <<= 8
            out[i] = s
    return out_arr
