"""Geometry-induced covariances and synthetic mixture datasets.

Builds the spatial/frequency correlation structure of a uniform linear
array over OFDM subcarriers, and draws labeled samples from zero-mean
Gaussian mixtures for the synthetic benchmarks.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import DimensionOverflow, GmtcError
from .linalg import EigenSystem, FieldMode, hermitian_eig, sample_gaussian

MAX_DIM = 4096


@dataclass(frozen=True)
class PathGeometry:
    """One propagation path: angle (rad), delay (s), power (variance)."""

    angle: float
    delay: float
    power: float

    def __post_init__(self):
        if self.power < 0:
            raise GmtcError("path power must be nonnegative")
        if not -math.pi / 2 <= self.angle <= math.pi / 2:
            raise GmtcError("path angle must lie in [-pi/2, pi/2]")
        if self.delay < 0:
            raise GmtcError("path delay must be nonnegative")


@dataclass(frozen=True)
class ArrayConfig:
    """Antenna/subcarrier geometry; source dimension is n_tx * n_sc."""

    n_tx: int
    n_sc: int
    spacing_hz: float = 15e3

    @property
    def dim(self):
        return self.n_tx * self.n_sc


def steering_vector(theta, n_tx):
    """ULA steering vector, entry m = exp(j*pi*m*sin(theta)), m = 0..n_tx-1."""
    m = np.arange(n_tx)
    return np.exp(1j * np.pi * m * np.sin(theta))


def delay_vector(tau, n_sc, spacing_hz):
    """Subcarrier response, entry n = exp(-j*2*pi*n*spacing*tau)."""
    n = np.arange(n_sc)
    return np.exp(-2j * np.pi * n * spacing_hz * tau)


def geometry_covariance(paths, cfg):
    """Covariance sum_l power_l (a a^H) kron (b b^H); rank <= len(paths).

    The vectorization convention is a(theta) kron b(tau): element index
    m * n_sc + n pairs antenna m with subcarrier n.
    """
    if not paths:
        raise GmtcError("at least one path required")
    if cfg.dim > MAX_DIM:
        raise DimensionOverflow(f"dimension {cfg.dim} exceeds maximum {MAX_DIM}")
    r = np.zeros((cfg.dim, cfg.dim), dtype=np.complex128)
    for p in paths:
        a = steering_vector(p.angle, cfg.n_tx)
        b = delay_vector(p.delay, cfg.n_sc, cfg.spacing_hz)
        v = np.kron(a, b)
        r += p.power * np.outer(v, v.conj())
    return r


def dft_eigensystem(n, eigenvalues):
    """Eigensystem with unitary DFT columns and the given spectrum.

    Columns are permuted to follow the descending eigenvalue order.
    """
    lam = np.asarray(eigenvalues, dtype=np.float64)
    if np.any(lam < 0):
        raise GmtcError("eigenvalues must be nonnegative")
    idx = np.arange(n)
    f = np.exp(-2j * np.pi * np.outer(idx, idx) / n) / np.sqrt(n)
    order = np.argsort(-lam, kind="stable")
    return EigenSystem(values=lam[order], vectors=np.ascontiguousarray(f[:, order]))


@dataclass(frozen=True)
class MixtureSpec:
    """Component weights plus one eigensystem per component."""

    weights: np.ndarray
    components: tuple                      # of EigenSystem
    mode: FieldMode = FieldMode.COMPLEX

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-12:
            raise GmtcError("weights must be strictly positive and sum to 1")
        dims = {c.dim for c in self.components}
        if len(dims) != 1:
            raise GmtcError("all components must share a dimension")
        object.__setattr__(self, "weights", w)

    @property
    def k(self):
        return len(self.components)

    @property
    def dim(self):
        return self.components[0].dim

    @classmethod
    def from_geometry(cls, paths_per_component, cfg, weights):
        comps = tuple(
            hermitian_eig(geometry_covariance(paths, cfg))
            for paths in paths_per_component
        )
        return cls(weights=np.asarray(weights, float), components=comps)

    @classmethod
    def synthetic_log_uniform(cls, k, n, seed, exp_low=-2.0, exp_high=2.0):
        """The synthetic benchmark family: uniform weights, shared unitary
        DFT eigenvectors, per-mode eigenvalues 10^Unif[exp_low, exp_high]."""
        u = rng.PhiloxStream(seed, rng.NS_SPECTRUM).uniforms(k * n).reshape(k, n)
        lam = 10.0 ** (exp_low + (exp_high - exp_low) * u)
        comps = tuple(dft_eigensystem(n, lam[c]) for c in range(k))
        return cls(weights=np.full(k, 1.0 / k), components=comps)


def synth_mixture_dataset(spec, n_samples, seed, sample_offset=0):
    """Draw (samples, labels): label c ~ weights, then h ~ N(0, R_c).

    Sample i depends only on (seed, sample_offset + i); extending a
    dataset never changes existing rows.
    """
    labels = rng.categorical(
        seed, rng.NS_LABEL, spec.weights, n_samples, start=sample_offset
    )
    n = spec.dim
    ctype = np.complex128 if spec.mode is FieldMode.COMPLEX else np.float64
    out = np.empty((n_samples, n), dtype=ctype)
    words = 2 * n if spec.mode is FieldMode.COMPLEX else n
    idx = sample_offset + np.arange(n_samples)
    z = rng.per_sample_normals(seed, rng.NS_GAUSS, idx, words)
    if spec.mode is FieldMode.COMPLEX:
        w = (z[:, 0::2] + 1j * z[:, 1::2]) * np.sqrt(0.5)
    else:
        w = z
    for c, comp in enumerate(spec.components):
        mask = labels == c
        if not np.any(mask):
            continue
        coeff = w[mask] * np.sqrt(comp.values)
        vecs = comp.vectors if spec.mode is FieldMode.COMPLEX else np.real(comp.vectors)
        out[mask] = coeff @ vecs.T
    return out, labels


def mixture_log2_density(spec, batch):
    """Exact log2 density of each row under the mixture (full constants)."""
    h = np.atleast_2d(batch)
    n = spec.dim
    k = spec.k
    ln2 = math.log(2.0)
    comp_scores = np.empty((h.shape[0], k))
    for c, comp in enumerate(spec.components):
        lam = comp.values
        if np.any(lam <= 0):
            raise GmtcError("mixture entropy requires full-rank components")
        t = h @ comp.vectors.conj()
        if spec.mode is FieldMode.COMPLEX:
            quad = ((t.real**2 + t.imag**2) / lam).sum(axis=1)
            logp = -n * math.log(math.pi) - np.log(lam).sum() - quad
        else:
            quad = ((np.real(t) ** 2) / lam).sum(axis=1)
            logp = -0.5 * (n * math.log(2 * math.pi) + np.log(lam).sum() + quad)
        comp_scores[:, c] = (logp + np.log(spec.weights[c])) / ln2
    peak = comp_scores.max(axis=1, keepdims=True)
    return (peak + np.log2(np.exp2(comp_scores - peak).sum(axis=1, keepdims=True))).ravel()


def conditional_entropy_bits(spec):
    """Exact h(x | C) in bits: the weight-averaged Gaussian entropies."""
    n = spec.dim
    total = 0.0
    for w, comp in zip(spec.weights, spec.components):
        lam = comp.values
        if np.any(lam <= 0):
            raise GmtcError("conditional entropy requires full-rank components")
        if spec.mode is FieldMode.COMPLEX:
            hc = n * math.log2(math.pi * math.e) + np.log2(lam).sum()
        else:
            hc = 0.5 * (n * math.log2(2 * math.pi * math.e) + np.log2(lam).sum())
        total += w * hc
    return total


def mc_differential_entropy(spec, n_samples, seed):
    """Plug-in Monte-Carlo estimate of h(x) in bits, with its standard error."""
    h, _ = synth_mixture_dataset(spec, n_samples, seed)
    neglog = -mixture_log2_density(spec, h)
    return float(neglog.mean()), float(neglog.std(ddof=1) / math.sqrt(n_samples))
