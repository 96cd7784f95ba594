"""The transform codec: MAP state selection, component-matched KLT,
reverse-waterfilled uniform scalar quantization, and range-coded
payload assembly, plus the single-covariance baseline.

A batch is coded in groups of tau consecutive blocks sharing one state
label (decided on the group's first block).  The label sequence forms
one range-coded stream; each group's coefficient indices form another,
so group payloads stay byte-aligned.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import coder
from .errors import (
    AllocationMismatch,
    CorruptStream,
    DimensionMismatch,
    EmptyDataset,
    GmtcError,
    IndivisibleBlock,
)
from .linalg import EigenSystem, FieldMode, whiten_score
from .mixture import EmConfig, TransformDictionary, build_dictionary, em_fit
from .rdtheory import (
    PooledSpectrum,
    label_entropy,
    solve_water_level,
    waterfill_at_level,
)


def pooled_spectrum(dictionary):
    return PooledSpectrum.from_components(
        dictionary.weights, dictionary.components, dictionary.mode
    )


def allocation_for(dictionary, *, rate=None, distortion=None, water_level=None):
    """Global reverse-waterfilling allocation over a dictionary's spectrum."""
    spec = pooled_spectrum(dictionary)
    if water_level is not None:
        return waterfill_at_level(spec, water_level)
    return solve_water_level(spec, rate=rate, distortion=distortion)


def _check_allocation(dictionary, allocation):
    spec = allocation.spectrum
    if spec.n != dictionary.dim or spec.k != dictionary.k \
            or spec.mode is not dictionary.mode:
        raise AllocationMismatch("allocation shape differs from dictionary")
    for c, comp in enumerate(dictionary.components):
        mask = spec.component == c
        lam = spec.values[mask][np.argsort(spec.mode_index[mask])]
        if not np.array_equal(lam, comp.values):
            raise AllocationMismatch(
                f"allocation eigenvalues differ from dictionary component {c}"
            )


def _quantizer_step(dstar, mode):
    # complex mode splits d* across two real components, each of step
    # sqrt(6 d*) contributing d*/2; real mode takes the full sqrt(12 d*)
    if mode is FieldMode.COMPLEX:
        return math.sqrt(6.0 * dstar)
    return math.sqrt(12.0 * dstar)


@dataclass
class OpCounters:
    """Coarse encoder accounting: fused multiply-adds plus scalar ops."""

    transform_ops: int = 0
    quantizer_ops: int = 0
    blocks: int = 0

    @property
    def total(self):
        return self.transform_ops + self.quantizer_ops

    def per_block(self):
        return self.total / max(self.blocks, 1)


class CodecTables:
    """Quantizer/entropy-model state derived from (dictionary, water level).

    Both encoder and decoder rebuild this deterministically, so only the
    water level travels in the container header.
    """

    def __init__(self, dictionary, allocation):
        _check_allocation(dictionary, allocation)
        self.dictionary = dictionary
        self.allocation = allocation
        self.mode = dictionary.mode
        self.mu = allocation.water_level
        if self.mu <= 0:
            raise GmtcError("codec requires a positive water level")
        self.label_model = coder.categorical_model(dictionary.weights)
        self.tables = [self.label_model]
        self.active = []        # per component: active mode indices
        self.steps = []         # per component: step per active mode
        self.table_ids = []     # per component: table index per active mode
        self.sym_lo = []        # per component: clamp bounds per active mode
        self.sym_hi = []
        self.pred_coeff_bits = []   # per component: modeled bits per block
        self.log2_weights = np.log2(dictionary.weights)
        self._table_set = None
        for c, comp in enumerate(dictionary.components):
            lam = comp.values
            act = np.nonzero(lam > self.mu)[0]
            sig = dictionary.quantizer_sigmas(c)
            steps = np.array([_quantizer_step(self.mu, self.mode)] * act.size)
            ids = np.empty(act.size, dtype=np.int64)
            lo = np.empty(act.size, dtype=np.int64)
            hi = np.empty(act.size, dtype=np.int64)
            bits = 0.0
            per_mode = 2 if self.mode is FieldMode.COMPLEX else 1
            for j, m in enumerate(act):
                model = coder.discretized_gaussian_model(sig[m], steps[j])
                ids[j] = len(self.tables)
                self.tables.append(model)
                lo[j], hi[j] = model.min_symbol, model.max_symbol
                bits += per_mode * coder.lookup_index_bits(sig[m], steps[j])
            self.active.append(act)
            self.steps.append(steps)
            self.table_ids.append(ids)
            self.sym_lo.append(lo)
            self.sym_hi.append(hi)
            self.pred_coeff_bits.append(bits)

    @property
    def table_set(self):
        if self._table_set is None:
            self._table_set = coder.TableSet(self.tables)
        return self._table_set

    def symbols_per_block(self, c):
        per_mode = 2 if self.mode is FieldMode.COMPLEX else 1
        return per_mode * self.active[c].size

    def quantize_rows(self, t_rows, c):
        """Quantize transform coefficients; returns the symbol matrix."""
        act = self.active[c]
        steps = self.steps[c]
        ta = t_rows[:, act]
        if self.mode is FieldMode.COMPLEX:
            sym = np.empty((t_rows.shape[0], 2 * act.size), dtype=np.int64)
            sym[:, 0::2] = np.rint(ta.real / steps)
            sym[:, 1::2] = np.rint(ta.imag / steps)
            lo = np.repeat(self.sym_lo[c], 2)
            hi = np.repeat(self.sym_hi[c], 2)
        else:
            sym = np.rint(np.real(ta) / steps).astype(np.int64)
            lo, hi = self.sym_lo[c], self.sym_hi[c]
        return np.clip(sym, lo, hi)

    def dequantize_rows(self, sym, c, n_rows):
        act = self.active[c]
        steps = self.steps[c]
        if self.mode is FieldMode.COMPLEX:
            t = np.zeros((n_rows, self.dictionary.dim), dtype=np.complex128)
            pairs = sym.reshape(n_rows, act.size, 2)
            t[:, act] = (pairs[:, :, 0] + 1j * pairs[:, :, 1]) * steps
        else:
            t = np.zeros((n_rows, self.dictionary.dim), dtype=np.float64)
            t[:, act] = sym.reshape(n_rows, act.size) * steps
        return t

    def row_ids(self, c):
        per_mode = 2 if self.mode is FieldMode.COMPLEX else 1
        return np.repeat(self.table_ids[c], per_mode)


def map_select_batch(dictionary, rows):
    """MAP states for a batch of row vectors (ties pick the lowest index)."""
    rows = np.atleast_2d(np.asarray(rows))
    if rows.shape[1] != dictionary.dim:
        raise DimensionMismatch(
            f"vector dim {rows.shape[1]} != dictionary dim {dictionary.dim}"
        )
    scores = np.empty((rows.shape[0], dictionary.k))
    for c, comp in enumerate(dictionary.components):
        scores[:, c] = whiten_score(comp, rows, dictionary.floor,
                                    mode=dictionary.mode) \
            + math.log(dictionary.weights[c])
    return scores.argmax(axis=1)


def map_select(dictionary, h):
    """MAP state: argmax_c log pi_c + log N(h; 0, R_c); first index on ties."""
    return int(map_select_batch(dictionary, np.asarray(h)[None, :])[0])


def _transform(dictionary, rows, c):
    return rows @ dictionary.components[c].vectors.conj()


def _inverse_transform(dictionary, t_rows, c):
    out = t_rows @ dictionary.components[c].vectors.T
    if dictionary.mode is FieldMode.REAL:
        out = np.real(out)
    return out


@dataclass(frozen=True)
class EncodedBlock:
    label: int
    indices: tuple           # per active mode: (re, im) or (x,) index tuples
    realized_bits: int
    predicted_bits: float


@dataclass(frozen=True)
class EncodedBatch:
    """One label stream plus byte-aligned per-group coefficient payloads."""

    water_level: float
    tau: int
    n_blocks: int
    label_stream: coder.Bitstream
    group_streams: tuple

    @property
    def n_groups(self):
        return len(self.group_streams)

    @property
    def total_bits(self):
        return self.label_stream.bit_length + sum(
            g.bit_length for g in self.group_streams
        )


@dataclass(frozen=True)
class EncoderConfig:
    dictionary: TransformDictionary
    allocation: object
    tau: int = 1

    def __post_init__(self):
        if self.tau < 1:
            raise GmtcError("tau must be >= 1")
        _check_allocation(self.dictionary, self.allocation)

    @property
    def mode(self):
        return self.dictionary.mode


def encode(cfg, h):
    """Encode one vector into a self-contained (block, bitstream) pair.

    The bitstream frames the label stream and the coefficient stream with
    a 2-byte length so decode() can rebuild the models after reading the
    label.
    """
    tables = CodecTables(cfg.dictionary, cfg.allocation)
    h = np.asarray(h)
    if h.shape != (cfg.dictionary.dim,):
        raise DimensionMismatch("encode expects a single dictionary-dim vector")
    c = map_select(cfg.dictionary, h)
    t = _transform(cfg.dictionary, h[None, :], c)
    sym = tables.quantize_rows(t, c)
    lbl_bs = coder.encode_symbols([tables.label_model], [c])
    models = [tables.tables[i] for i in tables.row_ids(c)]
    coeff_bs = coder.encode_symbols(models, sym[0])
    if len(lbl_bs.data) > 0xFFFF:
        raise GmtcError("label stream too long to frame")
    framed = len(lbl_bs.data).to_bytes(2, "little") + lbl_bs.data + coeff_bs.data
    act = tables.active[c]
    if cfg.mode is FieldMode.COMPLEX:
        idx = tuple((int(sym[0, 2 * j]), int(sym[0, 2 * j + 1]))
                    for j in range(act.size))
    else:
        idx = tuple((int(sym[0, j]),) for j in range(act.size))
    pred = -tables.log2_weights[c] / cfg.tau + float(
        sum(m.bits([s]).sum() for m, s in zip(models, sym[0]))
    )
    block = EncodedBlock(label=c, indices=idx, realized_bits=8 * len(framed),
                         predicted_bits=pred)
    return block, coder.Bitstream(data=framed)


def decode(dictionary, tau, stream, allocation):
    """Invert encode(); exact inverse of the deterministic pipeline."""
    tables = CodecTables(dictionary, allocation)
    data = stream.data
    if len(data) < 2:
        raise CorruptStream("framed block stream shorter than its header")
    nlbl = int.from_bytes(data[:2], "little")
    if 2 + nlbl > len(data):
        raise CorruptStream("label stream extends past the payload")
    lbl_bs = coder.Bitstream(data=data[2:2 + nlbl])
    c = int(coder.decode_symbols([tables.label_model], lbl_bs)[0])
    coeff_bs = coder.Bitstream(data=data[2 + nlbl:])
    models = [tables.tables[i] for i in tables.row_ids(c)]
    sym = coder.decode_symbols(models, coeff_bs)
    t = tables.dequantize_rows(sym[None, :], c, 1)
    return _inverse_transform(dictionary, t, c)[0]


def encode_batch(cfg, batch, labels=None, truth=None):
    """Encode a batch; returns (EncodedBatch, report dict).

    `labels` supplies ground-truth states for oracle-label operation: the
    encoder codes them instead of its MAP decisions.  `truth` only feeds
    the map_accuracy report entry without affecting the coding.
    """
    batch = np.asarray(batch)
    if batch.ndim != 2 or batch.shape[0] == 0:
        raise EmptyDataset("encode_batch needs a nonempty 2-D batch")
    if batch.shape[1] != cfg.dictionary.dim:
        raise DimensionMismatch("batch dimension differs from dictionary")
    tables = CodecTables(cfg.dictionary, cfg.allocation)
    n, dim = batch.shape
    if labels is not None and len(labels) != n:
        raise DimensionMismatch("label sequence length differs from batch")
    tau = cfg.tau
    n_groups = (n + tau - 1) // tau
    counters = OpCounters(blocks=n)
    map_labels = map_select_batch(cfg.dictionary, batch[::tau])
    if labels is not None:
        group_labels = np.asarray(labels)[::tau].astype(np.int64)
    else:
        group_labels = map_labels
    label_ts = coder.TableSet([tables.label_model])
    label_bs = label_ts.encode(np.zeros(n_groups, dtype=np.int64), group_labels)
    group_streams = []
    recon = np.empty_like(batch)
    pred_bits = 0.0
    for g in range(n_groups):
        first, last = g * tau, min((g + 1) * tau, n)
        c = int(group_labels[g])
        rows = batch[first:last]
        t = _transform(cfg.dictionary, rows, c)
        sym = tables.quantize_rows(t, c)
        ids = np.tile(tables.row_ids(c), rows.shape[0])
        bs = tables.table_set.encode(ids, sym.ravel())
        group_streams.append(bs)
        that = tables.dequantize_rows(sym.reshape(rows.shape[0], -1), c,
                                      rows.shape[0])
        recon[first:last] = _inverse_transform(cfg.dictionary, that, c)
        nact = tables.active[c].size
        per_act = 4 if cfg.mode is FieldMode.COMPLEX else 2
        counters.transform_ops += rows.shape[0] * dim * dim
        counters.quantizer_ops += rows.shape[0] * (
            per_act * nact + (dim - nact)
        )
        pred_bits += rows.shape[0] * tables.pred_coeff_bits[c] \
            - tables.log2_weights[c]
    enc = EncodedBatch(water_level=tables.mu, tau=tau, n_blocks=n,
                       label_stream=label_bs, group_streams=tuple(group_streams))
    err = batch - recon
    mse = float(np.mean(np.abs(err) ** 2))
    energy = float(np.sum(np.abs(batch) ** 2))
    nmse = float(np.sum(np.abs(err) ** 2) / energy) if energy > 0 else 0.0
    report = {
        "n_blocks": n,
        "dim": dim,
        "tau": tau,
        "water_level": tables.mu,
        "rate_bits_per_dim": enc.total_bits / (n * dim),
        "label_bits_per_dim": label_bs.bit_length / (n * dim),
        "predicted_bits_per_dim": pred_bits / (n * dim),
        "mse_per_dim": mse,
        "nmse_db": 10.0 * math.log10(nmse) if nmse > 0 else -math.inf,
        "label_entropy_bits": label_entropy(cfg.dictionary.weights),
        "encoder_ops_per_block": counters.per_block(),
        "counters": counters,
    }
    ref = labels if labels is not None else truth
    if ref is not None:
        per_block = np.repeat(map_labels, tau)[:n]
        report["map_accuracy"] = float(np.mean(per_block == np.asarray(ref)))
    return enc, report


def decode_batch(dictionary, allocation, enc):
    """Reconstruct the batch coded by encode_batch."""
    tables = CodecTables(dictionary, allocation)
    if not math.isclose(enc.water_level, tables.mu, rel_tol=0, abs_tol=0):
        raise AllocationMismatch("container water level differs from allocation")
    n, dim = enc.n_blocks, dictionary.dim
    tau = enc.tau
    n_groups = (n + tau - 1) // tau
    if enc.n_groups != n_groups:
        raise CorruptStream("group count inconsistent with block count and tau")
    label_ts = coder.TableSet([tables.label_model])
    group_labels = label_ts.decode(np.zeros(n_groups, dtype=np.int64),
                                   enc.label_stream)
    ctype = np.complex128 if dictionary.mode is FieldMode.COMPLEX else np.float64
    out = np.empty((n, dim), dtype=ctype)
    for g in range(n_groups):
        first, last = g * tau, min((g + 1) * tau, n)
        c = int(group_labels[g])
        nrows = last - first
        ids = np.tile(tables.row_ids(c), nrows)
        sym = tables.table_set.decode(ids, enc.group_streams[g])
        t = tables.dequantize_rows(sym.reshape(nrows, -1), c, nrows)
        out[first:last] = _inverse_transform(dictionary, t, c)
    return out


def count_encoder_flops(n):
    """Instrument one encode at dimension n; returns (measured, formula).

    The formula is the coarse transform-plus-quantization account
    n^2 + 4n; the measured counter comes from an actual encode of a white
    single-component source with every mode active.
    """
    if n < 1:
        raise GmtcError("dimension must be >= 1")
    es = EigenSystem(values=np.ones(n), vectors=np.eye(n, dtype=np.complex128))
    d = TransformDictionary(mode=FieldMode.COMPLEX, weights=np.array([1.0]),
                            components=(es,), floor=1e-12)
    alloc = allocation_for(d, water_level=0.25)
    cfg = EncoderConfig(dictionary=d, allocation=alloc, tau=1)
    from . import rng

    z = rng.PhiloxStream(7, rng.NS_MISC).normals(2 * n)
    h = (z[0::2] + 1j * z[1::2]) / math.sqrt(2)
    _, report = encode_batch(cfg, h[None, :])
    measured = int(report["counters"].total)
    return measured, n * n + 4 * n


def tc_baseline_fit_encode(train, test, rates, tau=1, reg=1e-6, seed=0):
    """Classical single-covariance transform coding baseline.

    Fits one covariance (K=1 EM path), codes the evaluation batch at each
    rate target, and returns (dictionary, list of per-rate reports).
    """
    model, _ = em_fit(np.asarray(train), EmConfig(k=1, reg=reg, seed=seed))
    d = build_dictionary(model)
    reports = []
    for r in rates:
        if r <= 0:
            power = pooled_spectrum(d).source_power()
            energy = float(np.sum(np.abs(test) ** 2))
            mse = float(np.mean(np.abs(test) ** 2))
            reports.append({
                "rate_bits_per_dim": 0.0,
                "mse_per_dim": mse,
                "nmse_db": 0.0,
                "water_level": float(max(c.values.max() for c in d.components)),
                "n_blocks": int(np.asarray(test).shape[0]),
                "dim": d.dim,
                "tau": tau,
            })
            continue
        alloc = allocation_for(d, rate=r)
        cfg = EncoderConfig(dictionary=d, allocation=alloc, tau=tau)
        _, rep = encode_batch(cfg, test)
        reports.append(rep)
    return d, reports


def stack_real(batch):
    """Complex batch rows h -> real rows [Re(h); Im(h)] of length 2N."""
    b = np.asarray(batch)
    return np.concatenate([b.real, b.imag], axis=1)


def unstack_real(batch):
    b = np.asarray(batch)
    n2 = b.shape[1]
    if n2 % 2:
        raise IndivisibleBlock("stacked batch width must be even")
    half = n2 // 2
    return b[:, :half] + 1j * b[:, half:]


def segment_vector(full, m):
    """Split a length-2N real vector into contiguous M-dim segments."""
    full = np.asarray(full)
    if full.ndim != 1:
        raise DimensionMismatch("segment_vector expects a 1-D vector")
    if full.shape[0] % m:
        raise IndivisibleBlock(
            f"block size {m} does not divide vector length {full.shape[0]}"
        )
    return [full[i * m:(i + 1) * m] for i in range(full.shape[0] // m)]


def segment_batch(batch, m):
    """Segment every row; returns shape (n_rows * width/m, m)."""
    b = np.asarray(batch)
    if b.shape[1] % m:
        raise IndivisibleBlock(
            f"block size {m} does not divide row length {b.shape[1]}"
        )
    return b.reshape(-1, m)


def unsegment_batch(segments, width):
    s = np.asarray(segments)
    if (s.shape[0] * s.shape[1]) % width:
        raise IndivisibleBlock("segment count inconsistent with row width")
    return s.reshape(-1, width)
