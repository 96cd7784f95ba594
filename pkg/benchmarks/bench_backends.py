#!/usr/bin/env python3
"""Benchmark the compiled kernels against the NumPy fallback.

Usage: python benchmarks/bench_backends.py [--sizes small|full]
"""

import argparse
import time

import numpy as np

from gmtc.backend import available_backends, get_backend


def _time(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_philox(impl, n_blocks):
    ctr = np.arange(n_blocks, dtype=np.uint64)
    stm = np.zeros(n_blocks, dtype=np.uint64)
    return _time(lambda: impl.philox_blocks(42, 0, ctr, stm))


def bench_jacobi(impl, n):
    rs = np.random.default_rng(0)
    b = rs.normal(size=(n, n)) + 1j * rs.normal(size=(n, n))
    a = b @ b.conj().T
    return _time(lambda: impl.jacobi_eig(a), repeats=3)


def _coder_inputs(n_symbols):
    rs = np.random.default_rng(1)
    pmf = rs.dirichlet(np.ones(64))
    freqs = np.maximum((pmf * (1 << 16)).astype(np.int64), 1)
    freqs[0] += (1 << 16) - freqs.sum()
    cum = np.zeros(65, dtype=np.uint32)
    np.cumsum(freqs, out=cum[1:])
    offsets = np.array([0, 65], dtype=np.int64)
    ids = np.zeros(n_symbols, dtype=np.int64)
    syms = rs.choice(64, size=n_symbols, p=pmf).astype(np.int64)
    return cum, offsets, ids, syms


def bench_coder(impl, n_symbols):
    cum, offsets, ids, syms = _coder_inputs(n_symbols)
    data = impl.rc_encode(cum, offsets, ids, syms)
    t_enc = _time(lambda: impl.rc_encode(cum, offsets, ids, syms), repeats=3)
    t_dec = _time(lambda: impl.rc_decode(data, cum, offsets, ids), repeats=3)
    return t_enc, t_dec


def bench_fnv(impl, n_bytes):
    blob = bytes(np.random.default_rng(2).integers(0, 256, n_bytes,
                                                   dtype=np.uint8))
    return _time(lambda: impl.fnv1a64(blob), repeats=3)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", choices=("small", "full"), default="full")
    args = ap.parse_args()
    small = args.sizes == "small"
    n_blocks = 100_000 if small else 1_000_000
    n_eig = 32 if small else 64
    n_sym = 50_000 if small else 500_000
    n_fnv = 200_000 if small else 4_000_000

    rows = []
    for name in available_backends():
        impl = get_backend(name)
        t_ph = bench_philox(impl, n_blocks)
        t_ja = bench_jacobi(impl, n_eig)
        t_en, t_de = bench_coder(impl, n_sym)
        t_fn = bench_fnv(impl, n_fnv)
        rows.append((name, t_ph, t_ja, t_en, t_de, t_fn))

    print(f"\nkernel benchmark ({'small' if small else 'full'} sizes)")
    print(f"  philox: {n_blocks} blocks | jacobi: {n_eig}x{n_eig} complex | "
          f"coder: {n_sym} symbols | fnv: {n_fnv} bytes\n")
    hdr = f"{'backend':<8} {'philox':>10} {'jacobi':>10} {'rc_enc':>10} " \
          f"{'rc_dec':>10} {'fnv1a':>10}"
    print(hdr)
    print("-" * len(hdr))
    for name, *ts in rows:
        print(f"{name:<8}" + "".join(f" {t * 1e3:9.2f}ms" for t in ts))
    if len(rows) == 2:
        base = rows[0][1:] if rows[0][0] == "python" else rows[1][1:]
        fast = rows[1][1:] if rows[0][0] == "python" else rows[0][1:]
        print("-" * len(hdr))
        print(f"{'speedup':<8}" + "".join(
            f" {b / f:9.1f}x " for b, f in zip(base, fast)))


if __name__ == "__main__":
    main()
