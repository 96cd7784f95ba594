"""Acceptance suite: one test per criterion, one PASS/FAIL line each.

Run with `pytest tests/test_acceptance.py -s` to see the per-criterion
lines and timings.
"""

import math
import time
from contextlib import contextmanager

import numpy as np
import pytest
from helpers_oracles import dp_min_rate, remap_labels

from gmtc import channel, coder, formats
from gmtc.channel import MixtureSpec, synth_mixture_dataset
from gmtc.codec import (
    EncoderConfig,
    allocation_for,
    count_encoder_flops,
    encode_batch,
    pooled_spectrum,
    segment_batch,
    stack_real,
    tc_baseline_fit_encode,
)
from gmtc.coder import categorical_model, decode_symbols, encode_symbols
from gmtc.linalg import FieldMode
from gmtc.mixture import EmConfig, build_dictionary, dictionary_from_spec, em_fit
from gmtc.rdtheory import (
    PooledSpectrum,
    label_entropy,
    label_overhead,
    solve_water_level,
)


@contextmanager
def criterion(name, desc, budget_sec):
    t0 = time.time()
    try:
        yield
    except Exception:
        print(f"\n[FAIL] {name} - {desc} ({time.time() - t0:.1f}s)")
        raise
    dt = time.time() - t0
    print(f"\n[PASS] {name} - {desc} ({dt:.1f}s)")
    assert dt < budget_sec, f"{name} exceeded its {budget_sec}s runtime budget"


def _nmse_db_at_rate(pool, rate, power):
    alloc = solve_water_level(pool, rate=max(rate, 1e-9))
    return 10 * math.log10(alloc.distortion / power)


def test_a1_global_water_level():
    with criterion("A1", "single global water level matches split-grid search",
                   60):
        rs = np.random.default_rng(11)
        checked_levels = 0
        for trial in range(50):
            k = int(rs.integers(1, 5))
            n = int(rs.integers(2, 7))
            w = rs.dirichlet(np.ones(k) * 3)
            spectra = [10.0 ** rs.uniform(-1.5, 1.5, n) for _ in range(k)]
            pool = PooledSpectrum.from_components(w, spectra, FieldMode.COMPLEX)
            d = float(rs.uniform(0.1, 0.85)) * pool.source_power()
            exact = solve_water_level(pool, distortion=d)
            grid = dp_min_rate(w, spectra, d, n, steps=200)
            slack = solve_water_level(pool,
                                      distortion=d * (1 - k / 200.0)).rate
            assert grid >= exact.rate - 1e-9
            assert grid <= slack + 1e-9
            # recovered per-component water levels agree with the global one
            splits = exact.component_distortions()
            active = exact.active_components()
            for c in range(k):
                if not active[c]:
                    continue
                own = solve_water_level(
                    PooledSpectrum.from_components([1.0], [spectra[c]],
                                                   FieldMode.COMPLEX),
                    distortion=splits[c],
                )
                assert own.water_level == pytest.approx(exact.water_level,
                                                        rel=1e-6)
                checked_levels += 1
        assert checked_levels > 50


def test_a2_bound_sandwich_and_gap():
    with criterion("A2", "upper-lower gap equals H(C)/(tau N); halves with N",
                   30):
        spec = MixtureSpec.synthetic_log_uniform(k=6, n=16, seed=21)
        d = dictionary_from_spec(spec)
        from gmtc.report import bounds_report

        rep = bounds_report(d, rates=list(np.linspace(0.1, 3.0, 12)), tau=2)
        shift = label_overhead(d.weights, 2, 16)
        assert shift == label_entropy(d.weights) / (2 * 16)
        for p in rep["curves"][0]["points"]:
            th = p["theoretical"]
            assert th["label_overhead"] == shift
            assert abs((th["r_gmtc_upper"] - th["r_cond"]) - shift) \
                <= 1e-12 * max(1.0, th["r_gmtc_upper"])
        # doubling N exactly halves the gap
        for n in (8, 16, 32, 64):
            assert label_overhead(d.weights, 2, 2 * n) \
                == label_overhead(d.weights, 2, n) / 2


def test_a3_entropy_bracket():
    with criterion("A3", "MC mixture entropy inside the conditional-entropy bracket", 60):
        spec = MixtureSpec.synthetic_log_uniform(k=3, n=8, seed=31)
        h_cond = channel.conditional_entropy_bits(spec)
        h_label = label_entropy(spec.weights)
        est, se = channel.mc_differential_entropy(spec, 100_000, seed=32)
        assert h_cond - 3 * se <= est <= h_cond + h_label + 3 * se
        # the bracket is informative: its width exceeds the MC noise
        assert h_label > 6 * se


def test_a4_em_monotone_and_k1_exact():
    with criterion("A4", "EM log-likelihood nondecreasing; K=1 exact", 120):
        rs = np.random.default_rng(41)
        for trial in range(20):
            k = int(rs.integers(1, 5))
            n = int(rs.integers(4, 9))
            n_samp = int(rs.integers(40 * k, 90 * k)) + 200
            spec = MixtureSpec.synthetic_log_uniform(k=max(k, 1), n=n,
                                                     seed=trial)
            data, _ = synth_mixture_dataset(spec, n_samp, seed=trial + 100)
            init = "kmeans" if trial % 2 else "random"
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                _, trace = em_fit(data, EmConfig(k=k, seed=trial, init=init,
                                                 max_iters=30))
            diffs = np.diff(np.asarray(trace))
            assert np.all(diffs >= -1e-9), f"trial {trial}: ll decreased"
        # K=1 reproduces the sample covariance up to the ridge
        spec = MixtureSpec.synthetic_log_uniform(k=1, n=6, seed=43)
        data, _ = synth_mixture_dataset(spec, 1500, seed=44)
        cfg = EmConfig(k=1, reg=1e-6, seed=0)
        model, _ = em_fit(data, cfg)
        samp = data.T @ data.conj() / data.shape[0]
        expect = samp + cfg.reg * (np.real(np.trace(samp)) / 6) * np.eye(6)
        assert np.linalg.norm(model.covariances[0] - expect) \
            <= 1e-10 * np.linalg.norm(expect)


def test_a5_codec_vs_theory_envelope():
    with criterion("A5", "codec within 3 dB of theory; EM within 3 dB of oracle",
                   600):
        n, k = 64, 8
        spec = MixtureSpec.synthetic_log_uniform(k=k, n=n, seed=101)
        train, _ = synth_mixture_dataset(spec, 20_000, seed=102)
        test, lab_te = synth_mixture_dataset(spec, 5_000, seed=102,
                                             sample_offset=20_000)
        d = dictionary_from_spec(spec)
        lab_d = remap_labels(spec, d, lab_te)
        pool = pooled_spectrum(d)
        power = pool.source_power()
        shift = label_overhead(d.weights, 1, n)
        model, _ = em_fit(train, EmConfig(k=k, seed=7, max_iters=60, tol=1e-5))
        dem = build_dictionary(model)
        targets = [0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0]
        for rate in targets:
            alloc = allocation_for(d, rate=rate)
            cfg = EncoderConfig(dictionary=d, allocation=alloc, tau=1)
            _, rep_or = encode_batch(cfg, test, labels=lab_d)
            alloc_em = allocation_for(dem, rate=rate)
            cfg_em = EncoderConfig(dictionary=dem, allocation=alloc_em, tau=1)
            _, rep_em = encode_batch(cfg_em, test)
            if rate < 0.5:
                continue
            r_emp = rep_or["rate_bits_per_dim"]
            nmse_bound = _nmse_db_at_rate(pool, r_emp, power)
            nmse_pred = _nmse_db_at_rate(pool, r_emp - shift, power)
            assert rep_or["nmse_db"] >= nmse_bound - 0.05, \
                f"rate {rate}: empirical point beats the genie bound"
            assert rep_or["nmse_db"] <= nmse_pred + 3.0, \
                f"rate {rate}: more than 3 dB above the label-aware prediction"
            assert rep_em["nmse_db"] <= rep_or["nmse_db"] + 3.0, \
                f"rate {rate}: EM-fitted run more than 3 dB above oracle"


def test_a6_mismatch_penalty_ordering():
    with criterion("A6", "TC-vs-GMTC gap in dB nondecreasing over K", 1200):
        gaps = []
        for k in (8, 16, 64):
            spec = MixtureSpec.synthetic_log_uniform(k=k, n=64, seed=200 + k)
            train, _ = synth_mixture_dataset(spec, 8_000, seed=300 + k)
            test, lab = synth_mixture_dataset(spec, 4_000, seed=300 + k,
                                              sample_offset=8_000)
            d = dictionary_from_spec(spec)
            lab_d = remap_labels(spec, d, lab)
            alloc = allocation_for(d, rate=1.0)
            cfg = EncoderConfig(dictionary=d, allocation=alloc, tau=1)
            _, rep_g = encode_batch(cfg, test, labels=lab_d)
            _, reps_tc = tc_baseline_fit_encode(train, test, rates=[1.0])
            gaps.append(reps_tc[0]["nmse_db"] - rep_g["nmse_db"])
        assert gaps[0] > 0, "GMTC must beat TC at K=8"
        assert all(b >= a - 1e-9 for a, b in zip(gaps, gaps[1:])), \
            f"gap sequence not nondecreasing: {gaps}"


def test_a7_lossless_layer():
    with criterion("A7", "lossless round trips, near-entropy codelength, "
                   "label-rate accounting", 300):
        rs = np.random.default_rng(71)
        # pool of models reused across round trips
        pool_models = [categorical_model(rs.dirichlet(np.full(m, 0.6)))
                       for m in rs.integers(2, 30, size=20)]
        pool_models += [coder.discretized_gaussian_model(s, st)
                        for s, st in rs.uniform(0.3, 4.0, size=(10, 2))]
        for trip in range(10_000):
            ln = int(rs.integers(0, 40))
            which = rs.integers(0, len(pool_models), size=ln)
            models = [pool_models[w] for w in which]
            syms = np.array([
                int(rs.integers(m.min_symbol, m.max_symbol + 1))
                for m in models
            ], dtype=np.int64)
            bs = encode_symbols(models, syms)
            assert np.array_equal(decode_symbols(models, bs), syms)
        # codelength within 1% + 32 bits of ideal on a 1e4-symbol sequence
        pmf = rs.dirichlet(np.full(12, 1.0))
        m = categorical_model(pmf)
        syms = rs.choice(12, size=10_000, p=pmf)
        bs = encode_symbols([m] * 10_000, syms)
        ideal = float(m.bits(syms).sum())
        assert bs.bit_length <= 1.01 * ideal + 32
        # amortized label rate within coder overhead of H(C)/(tau N):
        # group labels drawn i.i.d. from the model weights (the state is
        # constant within a group), coded once per group of tau blocks
        k, n_dim, n_blocks = 8, 64, 16_384
        weights = np.array([0.3, 0.2, 0.15, 0.12, 0.1, 0.06, 0.04, 0.03])
        hc = label_entropy(weights)
        lm = categorical_model(weights)
        for tau in (1, 4, 16):
            n_groups = n_blocks // tau
            groups = rs.choice(k, size=n_groups, p=weights)
            bs = encode_symbols([lm] * n_groups, groups)
            per_dim = bs.bit_length / (n_groups * tau * n_dim)
            target = hc / (tau * n_dim)
            sd = float(np.std(lm.bits(groups)))
            slack = (3 * sd / math.sqrt(n_groups) + 0.01 * hc
                     + 40 / n_groups) / (tau * n_dim)
            assert abs(per_dim - target) <= slack, \
                f"tau={tau}: label rate {per_dim} vs {target} +- {slack}"


def test_a8_accounting_audit(tmp_path):
    with criterion("A8", "dictionary scalar count and encoder op counter", 120):
        n, k = 64, 64
        spec = MixtureSpec.synthetic_log_uniform(k=k, n=n, seed=81)
        d = dictionary_from_spec(spec)
        path = tmp_path / "audit.gmtd"
        formats.write_gmtd(path, d)
        counts = formats.gmtd_scalar_count(path)
        assert counts["model_params"] == 2 * k * n * n + 2 * k * n
        lookup = int(coder.QUANT_LOOKUP_RATIOS.size + coder.QUANT_LOOKUP_BITS.size)
        assert lookup == 2000
        assert counts["model_params"] + lookup == 534_480
        measured, formula = count_encoder_flops(n)
        assert formula == n * n + 4 * n == 4352
        assert 0.5 <= measured / formula <= 2.0
        m128, f128 = count_encoder_flops(128)
        assert f128 == 16_896
        assert 0.5 <= m128 / f128 <= 2.0


def test_a9_k_monotonicity_segmented():
    with criterion("A9", "segmented real-mode NMSE nonincreasing in fitted K",
                   900):
        spec = MixtureSpec.synthetic_log_uniform(k=8, n=64, seed=400)
        train_c, _ = synth_mixture_dataset(spec, 6_000, seed=401)
        test_c, _ = synth_mixture_dataset(spec, 1_500, seed=401,
                                          sample_offset=6_000)
        m = 32
        train = segment_batch(stack_real(train_c), m)
        test = segment_batch(stack_real(test_c), m)
        nmse = []
        for k in (1, 2, 4, 8):
            model, _ = em_fit(train, EmConfig(k=k, seed=3, max_iters=50,
                                              tol=1e-6))
            d = build_dictionary(model)
            alloc = allocation_for(d, rate=1.0)
            cfg = EncoderConfig(dictionary=d, allocation=alloc, tau=1)
            _, rep = encode_batch(cfg, test)
            nmse.append(rep["nmse_db"])
        mc_slack = 0.25  # dB
        assert all(b <= a + mc_slack for a, b in zip(nmse, nmse[1:])), \
            f"NMSE sequence not nonincreasing within MC error: {nmse}"
        assert nmse[-1] < nmse[0] - 0.5, "richer mixture should clearly help"
