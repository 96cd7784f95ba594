"""Analytic rate-distortion machinery for Gaussian mixtures.

All eigenmodes of all components are pooled (each weighted by its
component probability) and reverse-waterfilled against one global water
level: per-mode distortion min(lambda, mu), per-mode rate
[log2(lambda/mu)]_+ (halved for real-field sources).  Rates are bits per
source dimension, distortions MSE per dimension.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InfeasibleTarget, InvariantViolation
from .linalg import FieldMode, hermitian_eig

BISECT_REL_TOL = 1e-10
BISECT_MAX_ITER = 200


@dataclass(frozen=True)
class PooledSpectrum:
    """All (component, mode) eigenvalues with their component weights."""

    component: np.ndarray   # entry -> component index
    mode_index: np.ndarray  # entry -> mode index within component
    values: np.ndarray      # eigenvalues
    weights: np.ndarray     # component probability per entry
    mode: FieldMode
    n: int                  # per-vector dimension

    @classmethod
    def from_components(cls, weights, spectra, mode, n=None):
        """Pool per-component eigenvalue arrays (or EigenSystems)."""
        lam_arrays = [
            np.asarray(getattr(s, "values", s), dtype=np.float64) for s in spectra
        ]
        if n is None:
            n = lam_arrays[0].shape[0]
        comp = np.concatenate([
            np.full(a.shape[0], c, dtype=np.int64) for c, a in enumerate(lam_arrays)
        ])
        midx = np.concatenate([np.arange(a.shape[0]) for a in lam_arrays])
        vals = np.concatenate(lam_arrays)
        wts = np.concatenate([
            np.full(a.shape[0], w) for w, a in zip(weights, lam_arrays)
        ])
        return cls(comp, midx, vals, wts, mode, n)

    @property
    def k(self):
        return int(self.component.max()) + 1 if self.component.size else 0

    def source_power(self):
        """Average source energy per dimension, (1/N) sum_c pi_c sum_m lambda."""
        return float(np.sum(self.weights * self.values) / self.n)

    def component_weights(self):
        w = np.zeros(self.k)
        first = np.unique(self.component, return_index=True)[1]
        w[self.component[first]] = self.weights[first]
        return w


def _as_pooled(obj, mode=None):
    if isinstance(obj, PooledSpectrum):
        return obj
    m = mode or getattr(obj, "mode", FieldMode.COMPLEX)
    return PooledSpectrum.from_components(obj.weights, obj.components, m)


@dataclass(frozen=True)
class RateAllocation:
    """Reverse-waterfilling outcome at one water level."""

    spectrum: PooledSpectrum
    water_level: float
    distortions: np.ndarray  # per pooled entry, min(lambda, mu)
    rates: np.ndarray        # per pooled entry, bits
    rate: float              # bits per dimension
    distortion: float        # MSE per dimension

    def component_distortions(self):
        """Per-component per-dimension distortion split implied by mu."""
        out = np.zeros(self.spectrum.k)
        np.add.at(out, self.spectrum.component, self.distortions)
        return out / self.spectrum.n

    def active_components(self):
        act = np.zeros(self.spectrum.k, dtype=bool)
        np.logical_or.at(act, self.spectrum.component, self.rates > 0)
        return act


@dataclass(frozen=True)
class RdPoint:
    rate: float
    distortion: float
    nmse_db: float
    water_level: float = math.nan


def _nmse_db(distortion, power):
    if distortion <= 0:
        return -math.inf
    return 10.0 * math.log10(distortion / power)


def waterfill_at_level(spec, mu):
    """Closed-form allocation for water level mu >= 0."""
    if mu < 0:
        raise InfeasibleTarget("water level must be nonnegative")
    lam = spec.values
    d = np.minimum(lam, mu)
    r = np.zeros_like(lam)
    act = lam > mu
    if mu > 0:
        r[act] = np.log2(lam[act] / mu)
    else:
        r[act] = np.inf
    if spec.mode is FieldMode.REAL:
        r = 0.5 * r
    rate = float(np.sum(spec.weights * r) / spec.n)
    dist = float(np.sum(spec.weights * d) / spec.n)
    return RateAllocation(spec, float(mu), d, r, rate, dist)


def _bisect(spec, objective, target, increasing):
    lam_max = float(spec.values.max(initial=0.0))
    lo, hi = 0.0, lam_max * (1.0 + 1e-12)
    for _ in range(BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        val = objective(mid)
        if abs(val - target) <= BISECT_REL_TOL * max(abs(target), 1e-300):
            return mid
        if (val < target) == increasing:
            lo = mid
        else:
            hi = mid
    raise InvariantViolation(
        f"bisection failed to reach target {target!r} (last mu interval "
        f"[{lo:.17g}, {hi:.17g}])"
    )


def solve_water_level(spec, *, distortion=None, rate=None):
    """Find the global water level matching a distortion or rate target."""
    spec = _as_pooled(spec)
    if (distortion is None) == (rate is None):
        raise ValueError("specify exactly one of distortion= or rate=")
    power = spec.source_power()
    if distortion is not None:
        if not 0.0 < distortion <= power * (1.0 + 1e-12):
            raise InfeasibleTarget(
                f"distortion target {distortion:g} outside (0, {power:g}]"
            )
        if distortion >= power:
            return waterfill_at_level(spec, float(spec.values.max()))
        mu = _bisect(spec, lambda m: waterfill_at_level(spec, m).distortion,
                     distortion, increasing=True)
    else:
        if rate < 0:
            raise InfeasibleTarget("rate target must be nonnegative")
        if rate == 0:
            return waterfill_at_level(spec, float(spec.values.max()))
        if power == 0.0:
            raise InfeasibleTarget("zero-power source cannot meet a positive rate")
        mu = _bisect(spec, lambda m: waterfill_at_level(spec, m).rate,
                     rate, increasing=False)
    return waterfill_at_level(spec, mu)


def _check_curve(points):
    pts = sorted(points, key=lambda p: p.distortion)
    for a, b in zip(pts, pts[1:]):
        if b.rate > a.rate + 1e-9:
            raise InvariantViolation("rate not nonincreasing in distortion")
    for a, b, c in zip(pts, pts[1:], pts[2:]):
        d21, d32 = b.distortion - a.distortion, c.distortion - b.distortion
        if d21 <= 0 or d32 <= 0:
            continue
        s1 = (b.rate - a.rate) / d21
        s2 = (c.rate - b.rate) / d32
        if s2 - s1 < -1e-9:
            raise InvariantViolation("rate curve is not convex in distortion")
    return points


def conditional_rd_curve(spec, *, distortions=None, rates=None):
    """Genie-aided benchmark curve evaluated on a grid of targets."""
    spec = _as_pooled(spec)
    power = spec.source_power()
    pts = []
    for tgt in (distortions if distortions is not None else rates):
        alloc = (solve_water_level(spec, distortion=tgt)
                 if distortions is not None
                 else solve_water_level(spec, rate=tgt))
        pts.append(RdPoint(alloc.rate, alloc.distortion,
                           _nmse_db(alloc.distortion, power), alloc.water_level))
    return _check_curve(pts)


def label_entropy(weights):
    """Shannon entropy of the component label, in bits; 0 log 0 = 0."""
    w = np.asarray(weights, dtype=np.float64)
    nz = w[w > 0]
    return float(-(nz * np.log2(nz)).sum())


def label_overhead(weights, tau, n):
    """Amortized lossless label rate H(C) / (tau * N), bits per dimension."""
    if tau < 1:
        raise InfeasibleTarget("state-coherence length tau must be >= 1")
    return label_entropy(weights) / (tau * n)


def gmtc_upper_bound(spec, *, tau, distortions=None, rates=None):
    """Label-aware achievable curve: conditional curve + H(C)/(tau N)."""
    spec = _as_pooled(spec)
    shift = label_overhead(spec.component_weights(), tau, spec.n)
    base = conditional_rd_curve(spec, distortions=distortions, rates=rates)
    return [RdPoint(p.rate + shift, p.distortion, p.nmse_db, p.water_level)
            for p in base]


def mismatched_tc_distortion(true_mixture, single_cov, rate):
    """Analytic RD point for coding the mixture with one covariance's KLT.

    The single covariance is eigendecomposed and reverse-waterfilled at
    the rate target; its per-mode forward test channel (gain a_m =
    1 - d_m/lambda_m, designed for its own spectrum) is then applied to
    the true per-mode variances diag(U^H R_c U) of every component, and
    the distortions are weight-averaged.  `true_mixture` is anything with
    .weights and .components (per-component eigensystems) and .mode.
    """
    mode = getattr(true_mixture, "mode", FieldMode.COMPLEX)
    es = hermitian_eig(single_cov)
    n = true_mixture.components[0].dim
    if es.dim != n:
        raise DimensionMismatch(f"covariance dim {es.dim} != source dim {n}")
    single = PooledSpectrum.from_components([1.0], [es.values], mode)
    alloc = solve_water_level(single, rate=rate)
    lam = es.values
    d = alloc.distortions
    gain = np.where(lam > 0, 1.0 - d / np.where(lam > 0, lam, 1.0), 0.0)
    total = 0.0
    power = 0.0
    for w, comp in zip(true_mixture.weights, true_mixture.components):
        t = es.vectors.conj().T @ comp.vectors  # mismatched basis of true modes
        v = (np.abs(t) ** 2) @ comp.values      # diag(U^H R_c U)
        per_mode = (1.0 - gain) ** 2 * v + gain * d
        total += w * per_mode.sum() / n
        power += w * comp.values.sum() / n
    return RdPoint(alloc.rate, float(total), _nmse_db(total, power),
                   alloc.water_level)
