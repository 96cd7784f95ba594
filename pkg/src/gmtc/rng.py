"""Deterministic counter-based random numbers (Philox4x64-10).

Every random quantity in the package is derived from a (seed, stream)
pair: the seed is the Philox key, the stream index occupies the third
counter word, and the block index the first.  Streams are therefore
independent and splittable; drawing more blocks from one stream never
perturbs another.  Gaussian variates use the Box-Muller transform on
53-bit uniforms so any Philox implementation reproduces them exactly.
"""

import numpy as np

from . import backend

# stream-id namespaces (top 16 bits); low 48 bits index within a namespace
NS_GAUSS = 1 << 48
NS_LABEL = 2 << 48
NS_SPECTRUM = 3 << 48
NS_INIT = 4 << 48
NS_MISC = 5 << 48

_INV53 = float(2.0**-53)


class PhiloxStream:
    """One logical stream of a seeded Philox4x64-10 generator."""

    def __init__(self, seed, stream=0):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.stream = int(stream) & 0xFFFFFFFFFFFFFFFF

    def words(self, nblocks, start=0):
        """Raw output words, shape (nblocks, 4), uint64."""
        ctr = np.arange(start, start + nblocks, dtype=np.uint64)
        stm = np.full(nblocks, self.stream, dtype=np.uint64)
        return backend.philox_blocks(self.seed, 0, ctr, stm)

    def uniforms(self, count, start_word=0):
        """Doubles in [0, 1) from consecutive output words."""
        first_block = start_word // 4
        last_block = (start_word + count + 3) // 4
        w = self.words(last_block - first_block, start=first_block).ravel()
        off = start_word - 4 * first_block
        w = w[off:off + count]
        return (w >> np.uint64(11)).astype(np.float64) * _INV53

    def normals(self, count, start_word=0):
        """Standard normal doubles via Box-Muller on word pairs.

        Word pair (2i, 2i+1) yields normals (2i, 2i+1); start_word must be
        even so windows compose without overlap.
        """
        if start_word % 2:
            raise ValueError("start_word must be even for normals")
        npairs = (count + 1) // 2
        u = self.uniforms(2 * npairs, start_word=start_word)
        u1 = 1.0 - u[0::2]  # in (0, 1]: safe for log
        u2 = u[1::2]
        r = np.sqrt(-2.0 * np.log(u1))
        ang = (2.0 * np.pi) * u2
        z = np.empty(2 * npairs, dtype=np.float64)
        z[0::2] = r * np.cos(ang)
        z[1::2] = r * np.sin(ang)
        return z[:count]


def per_sample_normals(seed, namespace_base, sample_indices, words_per_sample):
    """Normals for many samples, one stream per sample.

    Returns shape (len(sample_indices), words_per_sample).  Row i depends
    only on (seed, namespace_base + sample_indices[i]), so datasets can be
    extended or generated in chunks without changing existing rows.
    """
    idx = np.asarray(sample_indices, dtype=np.uint64)
    nsamp = idx.shape[0]
    blocks_per = (words_per_sample + 3) // 4
    ctr = np.tile(np.arange(blocks_per, dtype=np.uint64), nsamp)
    stm = np.repeat(np.uint64(namespace_base) + idx, blocks_per)
    w = backend.philox_blocks(seed, 0, ctr, stm).reshape(nsamp, 4 * blocks_per)
    u = (w >> np.uint64(11)).astype(np.float64) * _INV53
    u1 = 1.0 - u[:, 0::2]
    u2 = u[:, 1::2]
    r = np.sqrt(-2.0 * np.log(u1))
    ang = (2.0 * np.pi) * u2
    z = np.empty_like(u)
    z[:, 0::2] = r * np.cos(ang)
    z[:, 1::2] = r * np.sin(ang)
    return z[:, :words_per_sample]


def categorical(seed, stream, weights, count, start=0):
    """Deterministic categorical draws by inverse CDF on one uniform each."""
    cdf = np.cumsum(np.asarray(weights, dtype=np.float64))
    cdf[-1] = 1.0 + 1e-12  # guard the u ~ 1 edge
    u = PhiloxStream(seed, stream).uniforms(count, start_word=start)
    return np.searchsorted(cdf, u, side="right").astype(np.int64)
