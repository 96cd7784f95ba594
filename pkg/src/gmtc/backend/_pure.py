"""NumPy fallback implementations of the hot kernels.

Selected automatically when the compiled extension is unavailable (or when
GMTC_BACKEND=python).  Each function is an exact behavioral twin of its
Cython counterpart: identical operation order, identical integer semantics,
bit-identical results.
"""

import numpy as np

BACKEND_NAME = "python"

_MASK32 = np.uint64(0xFFFFFFFF)
_M0 = np.uint64(0xD2E7470EE14C6C93)
_M1 = np.uint64(0xCA5A826395121157)
_W0 = np.uint64(0x9E3779B97F4A7C15)
_W1 = np.uint64(0xBB67AE8584CAA73B)
_U64 = np.uint64


def _mulhilo(a, b):
    # 64x64 -> 128 bit product emulated with 32-bit limbs
    al = a & _MASK32
    ah = a >> _U64(32)
    bl = b & _MASK32
    bh = b >> _U64(32)
    ll = al * bl
    lh = al * bh
    hl = ah * bl
    hh = ah * bh
    mid = (ll >> _U64(32)) + (lh & _MASK32) + (hl & _MASK32)
    lo = (ll & _MASK32) | ((mid & _MASK32) << _U64(32))
    hi = hh + (lh >> _U64(32)) + (hl >> _U64(32)) + (mid >> _U64(32))
    return hi, lo


def philox_blocks(key0, key1, ctr_lo, ctr_stream):
    """Philox4x64-10 outputs for counter rows (ctr_lo[i], 0, ctr_stream[i], 0).

    Returns a uint64 array of shape (len(ctr_lo), 4) holding the four
    output words per counter block.
    """
    x0 = np.ascontiguousarray(ctr_lo, dtype=np.uint64).copy()
    x1 = np.zeros(x0.shape[0], dtype=np.uint64)
    x2 = np.ascontiguousarray(ctr_stream, dtype=np.uint64).copy()
    x3 = np.zeros(x0.shape[0], dtype=np.uint64)
    k0 = _U64(key0)
    k1 = _U64(key1)
    with np.errstate(over="ignore"):
        for rnd in range(10):
            if rnd:
                k0 += _W0
                k1 += _W1
            hi0, lo0 = _mulhilo(_M0, x0)
            hi1, lo1 = _mulhilo(_M1, x2)
            x0 = hi1 ^ x1 ^ k0
            x1 = lo1
            x2 = hi0 ^ x3 ^ k1
            x3 = lo0
    return np.stack([x0, x1, x2, x3], axis=1)


def jacobi_eig(a, tol=1e-14, max_sweeps=30):
    """Cyclic Jacobi diagonalization of a Hermitian complex matrix.

    Returns (diag, vectors, sweeps) with the raw (unsorted) eigenvalues on
    diag and the accumulated unitary in vectors.  The rotation sequence is
    fixed (row-cyclic), so the output is deterministic.
    """
    a = np.array(a, dtype=np.complex128, copy=True)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    fro = np.sqrt(np.sum(np.abs(a) ** 2))
    if fro == 0.0 or n == 1:
        return np.real(np.diag(a)).copy(), v, 0
    sweeps = 0
    for _ in range(max_sweeps):
        m = a.real**2 + a.imag**2
        np.fill_diagonal(m, 0.0)
        off2 = m.sum()
        if np.sqrt(max(off2, 0.0)) <= tol * fro:
            break
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                g = np.sqrt(apq.real * apq.real + apq.imag * apq.imag)
                if g == 0.0:
                    continue
                ph = apq / g
                phc = ph.conjugate()
                app = a[p, p].real
                aqq = a[q, q].real
                theta = (aqq - app) / (2.0 * g)
                if theta >= 0.0:
                    t = 1.0 / (theta + np.sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # A <- R^H A R with R[p,p]=R[q,q]=c, R[p,q]=s*ph, R[q,p]=-s*conj(ph)
                colp = a[:, p].copy()
                colq = a[:, q].copy()
                a[:, p] = c * colp - (s * phc) * colq
                a[:, q] = (s * ph) * colp + c * colq
                rowp = a[p, :].copy()
                rowq = a[q, :].copy()
                a[p, :] = c * rowp - (s * ph) * rowq
                a[q, :] = (s * phc) * rowp + c * rowq
                a[p, p] = app - t * g
                a[q, q] = aqq + t * g
                a[p, q] = 0.0
                a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - (s * phc) * vq
                v[:, q] = (s * ph) * vp + c * vq
    return np.real(np.diag(a)).copy(), v, sweeps


def fnv1a64(data):
    """64-bit FNV-1a over a bytes-like object."""
    h = 0xCBF29CE484222325
    for b in bytes(data):
        h ^= b
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


_RC_TOP = 1 << 32
_RC_BOT = 1 << 24


def _rc_carry(out):
    i = len(out) - 1
    while out[i] == 0xFF:
        out[i] = 0
        i -= 1
    out[i] += 1


def rc_encode(cum, offsets, model_ids, symbols):
    """Range-code `symbols` where symbol i uses frequency table model_ids[i].

    `cum` holds the concatenated cumulative tables; table m spans
    cum[offsets[m] : offsets[m+1]] with cum[offsets[m]] == 0 and the last
    entry equal to the fixed total (1 << 16).
    """
    out = bytearray()
    low = 0
    rng = _RC_TOP - 1
    for i in range(len(symbols)):
        base = int(offsets[model_ids[i]])
        top = int(offsets[model_ids[i] + 1])
        total = int(cum[top - 1])
        s = int(symbols[i])
        clo = int(cum[base + s])
        chi = int(cum[base + s + 1])
        r = rng // total
        low += r * clo
        if chi == total:
            rng -= r * clo
        else:
            rng = r * (chi - clo)
        if low >= _RC_TOP:
            _rc_carry(out)
            low -= _RC_TOP
        while rng < _RC_BOT:
            out.append((low >> 24) & 0xFF)
            low = (low << 8) & (_RC_TOP - 1)
            rng <<= 8
    # shortest flush: pick x in [low, low+rng) with the most trailing zero bytes
    x = low
    k = 4
    for kk in range(4):
        step = 1 << (32 - 8 * kk)
        cand = ((low + step - 1) // step) * step
        if cand < low + rng:
            x = cand
            k = kk
            break
    if x >= _RC_TOP:
        _rc_carry(out)
        x -= _RC_TOP
    for j in range(k):
        out.append((x >> (24 - 8 * j)) & 0xFF)
    return bytes(out)


def rc_decode(data, cum, offsets, model_ids):
    """Inverse of rc_encode; reads past-the-end bytes as zero."""
    n = len(model_ids)
    out = np.empty(n, dtype=np.int64)
    nd = len(data)
    pos = 0
    code = 0
    for _ in range(4):
        code = (code << 8) | (data[pos] if pos < nd else 0)
        pos += 1
    rng = _RC_TOP - 1
    for i in range(n):
        base = int(offsets[model_ids[i]])
        top = int(offsets[model_ids[i] + 1])
        total = int(cum[top - 1])
        nsym = top - base - 1
        r = rng // total
        v = code // r
        if v >= total:
            v = total - 1
        lo_i = 0
        hi_i = nsym
        while hi_i - lo_i > 1:
            mid = (lo_i + hi_i) >> 1
            if int(cum[base + mid]) <= v:
                lo_i = mid
            else:
                hi_i = mid
        s = lo_i
        clo = int(cum[base + s])
        chi = int(cum[base + s + 1])
        code -= r * clo
        if chi == total:
            rng -= r * clo
        else:
            rng = r * (chi - clo)
        while rng < _RC_BOT:
            code = ((code << 8) | (data[pos] if pos < nd else 0)) & (_RC_TOP - 1)
            pos += 1
            rng <<= 8
        out[i] = s
    return out
