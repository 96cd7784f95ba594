"""Offline learning: EM for zero-mean Gaussian mixtures and the shared
transform dictionary derived from the fitted covariances."""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import DegenerateFit, DimensionMismatch, EmptyDataset, GmtcError
from .linalg import EigenSystem, FieldMode, hermitian_eig, whiten_score

DICT_FLOOR_REL = 1e-10


@dataclass(frozen=True)
class MixtureModel:
    """Weights and covariances of a fitted zero-mean mixture."""

    mode: FieldMode
    weights: np.ndarray
    covariances: tuple

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-12:
            raise GmtcError("weights must be positive and sum to 1")
        object.__setattr__(self, "weights", w)

    @property
    def k(self):
        return len(self.covariances)

    @property
    def dim(self):
        return self.covariances[0].shape[0]


@dataclass(frozen=True)
class TransformDictionary:
    """Shared encoder/decoder dictionary: (weight, eigensystem) per state.

    Components are canonically ordered (descending weight, ties broken by
    descending leading eigenvalue) so serialization is byte-stable.
    """

    mode: FieldMode
    weights: np.ndarray
    components: tuple          # of EigenSystem
    floor: float

    @property
    def k(self):
        return len(self.components)

    @property
    def dim(self):
        return self.components[0].dim

    def quantizer_sigmas(self, c):
        """Per-mode coefficient std per real component (quantizer metadata)."""
        lam = self.components[c].values
        if self.mode is FieldMode.COMPLEX:
            return np.sqrt(lam / 2.0)
        return np.sqrt(lam)

    def scalar_counts(self):
        """Serialized real-scalar audit: eigenvectors are stored as
        interleaved (re, im) pairs in both field modes."""
        k, n = self.k, self.dim
        return {
            "eigenvector_reals": 2 * k * n * n,
            "eigenvalue_reals": k * n,
            "quantizer_metadata_reals": k * n,
            "model_params": 2 * k * n * n + 2 * k * n,
        }


def _log_const(mode, n):
    if mode is FieldMode.COMPLEX:
        return -n * math.log(math.pi)
    return -0.5 * n * math.log(2.0 * math.pi)


def _component_scores(data, weights, eigs, mode):
    """log pi_c + log N(h; 0, R_c) for every sample/component (natural log)."""
    n = data.shape[1]
    out = np.empty((data.shape[0], len(eigs)))
    for c, es in enumerate(eigs):
        floor = max(es.values[0], 1e-300) * 1e-15
        out[:, c] = whiten_score(es, data, floor, mode=mode) \
            + math.log(weights[c]) + _log_const(mode, n)
    return out


def _logsumexp_rows(a):
    peak = a.max(axis=1, keepdims=True)
    return (peak + np.log(np.exp(a - peak).sum(axis=1, keepdims=True))).ravel()


def responsibilities(model, h):
    """Posterior component probabilities for one vector (or batch rows)."""
    h = np.atleast_2d(np.asarray(h))
    if h.shape[1] != model.dim:
        raise DimensionMismatch(f"dim {h.shape[1]} != model dim {model.dim}")
    eigs = [hermitian_eig(r) for r in model.covariances]
    scores = _component_scores(h, model.weights, eigs, model.mode)
    r = np.exp(scores - _logsumexp_rows(scores)[:, None])
    r /= r.sum(axis=1, keepdims=True)
    return r[0] if r.shape[0] == 1 else r


@dataclass
class EmConfig:
    k: int
    max_iters: int = 300
    tol: float = 1e-6
    reg: float = 1e-6
    prune_below: float = None
    seed: int = 0
    init: str = "kmeans"   # kmeans | random

    def __post_init__(self):
        if self.prune_below is None:
            self.prune_below = 1.0 / (50.0 * self.k)
        if self.tol <= 0 or self.reg < 0:
            raise GmtcError("tol must be positive and reg nonnegative")
        if not 0 <= self.prune_below < 1.0 / self.k:
            raise GmtcError("prune_below must lie in [0, 1/k)")
        if self.init not in ("kmeans", "random"):
            raise GmtcError("init must be 'kmeans' or 'random'")


def kmeans_energy_init(data, k, seed):
    """Hard responsibilities from k-means on per-mode energy profiles."""
    feats = np.abs(np.asarray(data)) ** 2
    n = feats.shape[0]
    if k == 1:
        return np.ones((n, 1))
    stream = rng.PhiloxStream(seed, rng.NS_INIT)
    u = stream.uniforms(k + 100)
    centers = np.empty((k, feats.shape[1]))
    centers[0] = feats[int(u[0] * n)]
    d2 = np.sum((feats - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        tot = d2.sum()
        if tot <= 0:
            centers[j] = feats[int(u[j] * n)]
            continue
        cdf = np.cumsum(d2 / tot)
        centers[j] = feats[min(np.searchsorted(cdf, u[j]), n - 1)]
        d2 = np.minimum(d2, np.sum((feats - centers[j]) ** 2, axis=1))
    assign = np.zeros(n, dtype=np.int64)
    for _ in range(100):
        dist = np.empty((n, k))
        for j in range(k):
            dist[:, j] = np.sum((feats - centers[j]) ** 2, axis=1)
        new_assign = dist.argmin(axis=1)
        for j in range(k):
            members = new_assign == j
            if not members.any():
                far = dist.min(axis=1).argmax()
                new_assign[far] = j
                members = new_assign == j
            centers[j] = feats[members].mean(axis=0)
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
    resp = np.zeros((n, k))
    resp[np.arange(n), assign] = 1.0
    return resp


def kmeans_energy_objective(data, resp):
    """Within-cluster sum of squares of the energy features (for tests)."""
    feats = np.abs(np.asarray(data)) ** 2
    total = 0.0
    for j in range(resp.shape[1]):
        members = resp[:, j] > 0
        if members.any():
            c = feats[members].mean(axis=0)
            total += np.sum((feats[members] - c) ** 2)
    return total


def _m_step(data, resp, mode, reg, prune_below):
    n_tr, n = data.shape
    weights = resp.mean(axis=0)
    keep = weights >= prune_below
    if not keep.any():
        keep[weights.argmax()] = True
    resp = resp[:, keep]
    weights = weights[keep] / weights[keep].sum()
    covs = []
    for c in range(resp.shape[1]):
        w = resp[:, c]
        den = w.sum()
        if den <= 0:
            den = 1.0
        r = (data * w[:, None]).T @ data.conj() / den
        r = 0.5 * (r + r.conj().T)
        ridge = reg * (np.real(np.trace(r)) / n)
        r = r + ridge * (np.eye(n) if mode is FieldMode.REAL else
                         np.eye(n, dtype=np.complex128))
        covs.append(r if mode is FieldMode.COMPLEX else np.real(r))
    return weights, covs


def em_fit(data, cfg):
    """EM for a zero-mean K-component Gaussian mixture.

    Returns (MixtureModel, loglik_trace) where the trace holds the
    average log-likelihood (natural log, full constants) per iteration.
    """
    data = np.asarray(data)
    if data.ndim != 2 or data.shape[0] == 0:
        raise EmptyDataset("need a nonempty 2-D sample array")
    mode = FieldMode.COMPLEX if np.iscomplexobj(data) else FieldMode.REAL
    n_tr, n = data.shape
    if n_tr < 10 * cfg.k:
        raise EmptyDataset(f"{n_tr} samples cannot support k={cfg.k} (need 10k)")
    if n_tr < 100 * cfg.k:
        warnings.warn(
            f"only {n_tr} samples for k={cfg.k}; fits may be noisy", stacklevel=2
        )
    init_trace = float(np.mean(np.abs(data) ** 2)) * n
    if cfg.init == "kmeans":
        resp = kmeans_energy_init(data, cfg.k, cfg.seed)
    else:
        assign = rng.categorical(cfg.seed, rng.NS_INIT,
                                 np.full(cfg.k, 1.0 / cfg.k), n_tr)
        resp = np.zeros((n_tr, cfg.k))
        resp[np.arange(n_tr), assign] = 1.0
    trace = []
    weights, covs, eigs = None, None, None
    for it in range(cfg.max_iters):
        weights, covs = _m_step(data, resp, mode, cfg.reg, cfg.prune_below)
        if sum(np.real(np.trace(r)) for r in covs) < 1e-12 * init_trace:
            raise DegenerateFit("all mixture components collapsed")
        eigs = [hermitian_eig(r) for r in covs]
        scores = _component_scores(data, weights, eigs, mode)
        lse = _logsumexp_rows(scores)
        ll = float(lse.mean())
        trace.append(ll)
        if it > 0 and ll - trace[-2] < cfg.tol * abs(trace[-2]):
            break
        resp = np.exp(scores - lse[:, None])
        resp /= resp.sum(axis=1, keepdims=True)
    model = MixtureModel(mode=mode, weights=weights, covariances=tuple(covs))
    return model, trace


def build_dictionary(model, eigs=None):
    """Eigendecompose each covariance and canonicalize the component order."""
    if eigs is None:
        eigs = [hermitian_eig(r) for r in model.covariances]
    lam1 = np.array([e.values[0] for e in eigs])
    order = np.lexsort((-lam1, -model.weights))
    comps = tuple(eigs[int(i)] for i in order)
    weights = model.weights[order]
    floor = DICT_FLOOR_REL * max(e.values[0] for e in comps)
    return TransformDictionary(mode=model.mode, weights=weights,
                               components=comps, floor=floor)


def model_from_dictionary(d):
    """Reconstruct the mixture model a dictionary encodes."""
    covs = tuple(
        c.matrix() if d.mode is FieldMode.COMPLEX else np.real(c.matrix())
        for c in d.components
    )
    return MixtureModel(mode=d.mode, weights=d.weights.copy(), covariances=covs)


def dictionary_from_spec(spec):
    """Dictionary straight from a known mixture (oracle dictionaries)."""
    lam1 = np.array([e.values[0] for e in spec.components])
    order = np.lexsort((-lam1, -np.asarray(spec.weights)))
    comps = tuple(spec.components[int(i)] for i in order)
    weights = np.asarray(spec.weights)[order]
    floor = DICT_FLOOR_REL * max(e.values[0] for e in comps)
    return TransformDictionary(mode=spec.mode, weights=weights,
                               components=comps, floor=floor)
