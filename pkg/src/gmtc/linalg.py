"""Dense Hermitian linear algebra and correlated Gaussian sampling.

Complex matrices are complex128 arrays, real-mode matrices float64.  All
functions are pure; eigensystems are canonicalized (descending spectrum,
first significant eigenvector entry real-positive) so results serialize
byte-stably.
"""

import enum
from dataclasses import dataclass

import numpy as np

from . import backend, rng
from .errors import DimensionMismatch, NonHermitianInput

HERMITIAN_TOL = 1e-10
RECONSTRUCT_TOL = 1e-8
EIG_CLAMP_REL = 1e-12


class FieldMode(enum.Enum):
    """Field of the source vectors; rate formulas branch on it."""

    COMPLEX = "complex"
    REAL = "real"


def check_hermitian(a, tol=HERMITIAN_TOL):
    """Raise NonHermitianInput unless a == a^H within tol * max|entry|."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NonHermitianInput(f"expected a square matrix, got shape {a.shape}")
    scale = np.max(np.abs(a))
    if scale == 0.0:
        return a
    dev = np.max(np.abs(a - a.conj().T))
    if dev > tol * scale:
        raise NonHermitianInput(
            f"symmetry deviation {dev:.3e} exceeds {tol:g} * max|entry|"
        )
    return a


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues (nonincreasing, >= 0) and matching unitary eigenvectors."""

    values: np.ndarray    # (n,) float64
    vectors: np.ndarray   # (n, n) complex128 or float64, columns are modes

    @property
    def dim(self):
        return self.values.shape[0]

    @property
    def is_complex(self):
        return np.iscomplexobj(self.vectors)

    def matrix(self):
        """Reconstruct U diag(values) U^H."""
        u = self.vectors
        return (u * self.values) @ u.conj().T


def _canonical_phase(vectors):
    """Scale each column so its first significant entry is real-positive."""
    v = vectors.copy()
    n = v.shape[1]
    mags = np.abs(v)
    colmax = mags.max(axis=0)
    for j in range(n):
        if colmax[j] == 0.0:
            continue
        idx = np.nonzero(mags[:, j] > 1e-6 * colmax[j])[0][0]
        pivot = v[idx, j]
        v[:, j] = v[:, j] * (abs(pivot) / pivot)
    return v


def hermitian_eig(a, tol=HERMITIAN_TOL):
    """Eigendecomposition of a Hermitian (or real symmetric) matrix.

    Uses cyclic Jacobi rotations (compiled kernel when available); output
    is deterministic for identical input: eigenvalues sorted descending,
    ties keeping sweep order, eigenvector phases canonicalized, values
    below EIG_CLAMP_REL * lambda_1 clamped to exactly zero.
    """
    a = check_hermitian(a, tol=tol)
    real_in = not np.iscomplexobj(a)
    diag, vecs, _ = backend.jacobi_eig(np.asarray(a, dtype=np.complex128))
    order = np.argsort(-diag, kind="stable")
    vals = diag[order]
    vecs = vecs[:, order]
    if vals.size and vals[0] > 0.0:
        vals = np.where(vals < EIG_CLAMP_REL * vals[0], 0.0, vals)
    vals = np.maximum(vals, 0.0)
    vecs = _canonical_phase(vecs)
    if real_in:
        vecs = np.ascontiguousarray(vecs.real)
    return EigenSystem(values=vals, vectors=vecs)


def sample_gaussian(eig, count, seed, mode, sample_offset=0):
    """Draw `count` zero-mean vectors with covariance U diag(values) U^H.

    Complex mode draws proper complex normals (E|h_m|^2 = lambda_m), real
    mode plain normals.  Sample i depends only on (seed, sample_offset+i),
    so batches can be generated chunk-by-chunk or extended later.
    """
    n = eig.dim
    scale = np.sqrt(eig.values)
    idx = np.arange(sample_offset, sample_offset + count)
    if mode is FieldMode.COMPLEX:
        z = rng.per_sample_normals(seed, rng.NS_GAUSS, idx, 2 * n)
        w = (z[:, 0::2] + 1j * z[:, 1::2]) * np.sqrt(0.5)
        coeff = w * scale
        return coeff @ eig.vectors.T
    z = rng.per_sample_normals(seed, rng.NS_GAUSS, idx, n)
    coeff = z * scale
    return coeff @ np.real(eig.vectors).T


def whiten_score(eig, h, floor, mode=FieldMode.COMPLEX):
    """Log-density of h under N(0, U diag(values) U^H), up to the
    mode-count constant, with eigenvalues floored for stability.

    Complex: -(sum log max(lam,floor) + sum |u^H h|^2 / max(lam,floor));
    real mode halves both terms.  Accepts a single vector or a batch of
    row vectors and returns a scalar or a length-n array.
    """
    h = np.asarray(h)
    single = h.ndim == 1
    hh = h[None, :] if single else h
    if hh.shape[1] != eig.dim:
        raise DimensionMismatch(
            f"vector dim {hh.shape[1]} != eigensystem dim {eig.dim}"
        )
    lam = np.maximum(eig.values, floor)
    t = hh @ eig.vectors.conj()
    quad = ((t.real**2 + t.imag**2) / lam).sum(axis=1) if np.iscomplexobj(t) \
        else ((t * t) / lam).sum(axis=1)
    logdet = np.sum(np.log(lam))
    score = -(logdet + quad)
    if mode is FieldMode.REAL:
        score = 0.5 * score
    return float(score[0]) if single else score
