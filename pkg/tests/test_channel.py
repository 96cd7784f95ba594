import numpy as np
import pytest

from gmtc import channel
from gmtc.channel import (
    ArrayConfig,
    MixtureSpec,
    PathGeometry,
    delay_vector,
    dft_eigensystem,
    geometry_covariance,
    steering_vector,
    synth_mixture_dataset,
)
from gmtc.errors import DimensionOverflow, GmtcError
from gmtc.linalg import FieldMode, hermitian_eig


def test_steering_broadside():
    assert np.allclose(steering_vector(0.0, 4), np.ones(4))


def test_steering_endfire():
    v = steering_vector(np.pi / 2, 2)
    assert np.allclose(v, [1.0, -1.0])


def test_steering_per_entry_oracle():
    v = steering_vector(np.pi / 6, 3)
    for m in range(3):
        assert v[m] == pytest.approx(np.exp(1j * np.pi * m * np.sin(np.pi / 6)))
    assert np.allclose(np.abs(v), 1.0)


def test_delay_zero():
    assert np.allclose(delay_vector(0.0, 5, 15e3), np.ones(5))


def test_delay_half_cycle():
    # spacing * tau = 0.5
    v = delay_vector(0.5 / 15e3, 2, 15e3)
    assert np.allclose(v, [1.0, -1.0])


def test_delay_per_entry_oracle():
    tau, df, n = 3.2e-6, 30e3, 8
    v = delay_vector(tau, n, df)
    for i in range(n):
        assert v[i] == pytest.approx(np.exp(-2j * np.pi * i * df * tau))


def test_geometry_single_path_rank_one():
    cfg = ArrayConfig(n_tx=4, n_sc=4)
    r = geometry_covariance([PathGeometry(0.3, 1e-6, 1.0)], cfg)
    es = hermitian_eig(r)
    assert np.trace(r).real == pytest.approx(cfg.dim)
    assert np.sum(es.values > 1e-9 * es.values[0]) == 1
    assert es.values[0] == pytest.approx(cfg.dim)


def test_geometry_two_orthogonal_paths():
    # broadside and endfire steering on 2 antennas are orthogonal; same delay
    cfg = ArrayConfig(n_tx=2, n_sc=2)
    paths = [PathGeometry(0.0, 0.0, 1.0), PathGeometry(np.pi / 2, 0.0, 2.0)]
    r = geometry_covariance(paths, cfg)
    es = hermitian_eig(r)
    n = cfg.dim
    assert np.trace(r).real == pytest.approx(3 * n)
    assert np.allclose(es.values, [2 * n, n, 0, 0], atol=1e-9)


def test_geometry_matches_naive_loop_oracle():
    cfg = ArrayConfig(n_tx=4, n_sc=4, spacing_hz=20e3)
    rs = np.random.default_rng(3)
    paths = [
        PathGeometry(float(rs.uniform(-1.5, 1.5)), float(rs.uniform(0, 2e-6)),
                     float(rs.uniform(0.2, 2.0)))
        for _ in range(3)
    ]
    r = geometry_covariance(paths, cfg)
    n = cfg.dim
    ref = np.zeros((n, n), dtype=complex)
    for p in paths:
        a = np.exp(1j * np.pi * np.arange(4) * np.sin(p.angle))
        b = np.exp(-2j * np.pi * np.arange(4) * cfg.spacing_hz * p.delay)
        v = np.empty(n, dtype=complex)
        for i in range(4):
            for j in range(4):
                v[i * 4 + j] = a[i] * b[j]
        for i in range(n):
            for j in range(n):
                ref[i, j] += p.power * v[i] * np.conj(v[j])
    assert np.max(np.abs(r - ref)) < 1e-12 * np.max(np.abs(ref))
    # trace identity: sum of eigenvalues = N * total path power
    es = hermitian_eig(r)
    power = sum(p.power for p in paths)
    assert es.values.sum() == pytest.approx(n * power, rel=1e-8)


def test_geometry_dimension_overflow():
    cfg = ArrayConfig(n_tx=128, n_sc=128)
    with pytest.raises(DimensionOverflow):
        geometry_covariance([PathGeometry(0.0, 0.0, 1.0)], cfg)


def test_dft_eigensystem_trivial():
    es = dft_eigensystem(1, [2.5])
    assert es.values[0] == 2.5
    assert np.allclose(es.vectors, [[1.0]])


def test_dft_eigensystem_white():
    es = dft_eigensystem(4, np.ones(4))
    assert np.allclose(es.matrix(), np.eye(4), atol=1e-12)
    assert np.allclose(es.vectors.conj().T @ es.vectors, np.eye(4), atol=1e-12)


def test_dft_eigensystem_random_spectrum():
    rs = np.random.default_rng(11)
    lam = 10.0 ** rs.uniform(-2, 2, size=8)
    es = dft_eigensystem(8, lam)
    m = es.matrix()
    assert np.max(np.abs(m - m.conj().T)) < 1e-10
    assert np.trace(m).real == pytest.approx(lam.sum(), rel=1e-10)
    assert np.all(np.diff(es.values) <= 0)


def test_synth_single_component():
    spec = MixtureSpec.synthetic_log_uniform(k=1, n=8, seed=4)
    h, labels = synth_mixture_dataset(spec, 500, seed=9)
    assert np.all(labels == 0)
    assert h.shape == (500, 8)


def test_synth_label_frequencies():
    spec = MixtureSpec.synthetic_log_uniform(k=4, n=4, seed=4)
    _, labels = synth_mixture_dataset(spec, 100_000, seed=10)
    freq = np.bincount(labels, minlength=4) / labels.size
    assert np.all((freq >= 0.24) & (freq <= 0.26))


def test_synth_extension_stability_and_determinism():
    spec = MixtureSpec.synthetic_log_uniform(k=3, n=6, seed=1)
    h1, l1 = synth_mixture_dataset(spec, 50, seed=2)
    h2, l2 = synth_mixture_dataset(spec, 80, seed=2)
    assert np.array_equal(h1, h2[:50]) and np.array_equal(l1, l2[:50])
    tail, tl = synth_mixture_dataset(spec, 30, seed=2, sample_offset=50)
    assert np.array_equal(tail, h2[50:]) and np.array_equal(tl, l2[50:])


def test_synth_benchmark_protocol_diagonal_in_dft_basis():
    # the synthetic protocol: DFT eigenvectors, log-uniform spectra
    n, k, per = 64, 8, 10_000
    spec = MixtureSpec.synthetic_log_uniform(k=k, n=n, seed=7)
    h, labels = synth_mixture_dataset(spec, k * per, seed=8)
    f = dft_eigensystem(n, np.ones(n)).vectors
    worst = 0.0
    for c in range(k):
        hc = h[labels == c]
        assert hc.shape[0] > per // 2
        t = hc @ f.conj()
        cov = t.T @ t.conj() / hc.shape[0]
        off = cov - np.diag(np.diag(cov))
        ratio = np.linalg.norm(off) / np.linalg.norm(cov)
        worst = max(worst, ratio)
    assert worst < 0.05


def test_mixture_spec_weight_validation():
    es = dft_eigensystem(2, [1.0, 2.0])
    with pytest.raises(GmtcError):
        MixtureSpec(weights=np.array([0.6, 0.6]), components=(es, es))


def test_entropy_bracket_property():
    spec = MixtureSpec.synthetic_log_uniform(k=3, n=8, seed=3)
    h_cond = channel.conditional_entropy_bits(spec)
    h_label = -np.sum(spec.weights * np.log2(spec.weights))
    est, se = channel.mc_differential_entropy(spec, 20_000, seed=5)
    assert h_cond - 3 * se <= est <= h_cond + h_label + 3 * se


def test_mc_entropy_matches_closed_form_single_gaussian():
    # K=1: h(x) = h(x|C) exactly
    spec = MixtureSpec.synthetic_log_uniform(k=1, n=6, seed=12)
    h_cond = channel.conditional_entropy_bits(spec)
    est, se = channel.mc_differential_entropy(spec, 30_000, seed=6)
    assert est == pytest.approx(h_cond, abs=4 * se)
