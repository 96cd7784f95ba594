"""Versioned little-endian binary containers.

CSIBIN  sample batches (float32 payload, complex interleaved)
GMTD    transform dictionaries (hash-sealed, canonical component order)
GMTB    coded feedback batches (label stream + byte-aligned group payloads)
CSIL    ground-truth label sidecars for oracle runs

All writes are atomic (temp file + rename); all readers validate magic,
version and structural lengths and raise FormatError otherwise.
"""

import os
import struct
import tempfile

import numpy as np

from . import backend, coder, codec
from .errors import FormatError
from .linalg import EigenSystem, FieldMode
from .mixture import TransformDictionary

CSIBIN_MAGIC = b"CSI1"
GMTD_MAGIC = b"GMTD"
GMTB_MAGIC = b"GMTB"
CSIL_MAGIC = b"CSIL"
FORMAT_VERSION = 1

STACK_COMPLEX_KRON = 0   # complex vec(H), steering kron delay element order
STACK_REAL_SPLIT = 1     # [Re(vec H); Im(vec H)] real stacking
STACK_REAL_SEGMENT = 2   # M-dim segments of a real-stacked vector


def _atomic_write(path, blob):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".gmtc-tmp-")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(blob)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _mode_byte(mode):
    return 0 if mode is FieldMode.COMPLEX else 1


def _mode_from_byte(b):
    if b == 0:
        return FieldMode.COMPLEX
    if b == 1:
        return FieldMode.REAL
    raise FormatError(f"unknown field-mode byte {b}")


def write_csibin(path, batch, stacking=STACK_COMPLEX_KRON):
    """Write a sample batch; complex batches store interleaved (re, im)."""
    batch = np.asarray(batch)
    if batch.ndim != 2:
        raise FormatError("CSIBIN expects a 2-D batch")
    mode = FieldMode.COMPLEX if np.iscomplexobj(batch) else FieldMode.REAL
    count, dim = batch.shape
    head = CSIBIN_MAGIC + struct.pack(
        "<HBIQB", FORMAT_VERSION, _mode_byte(mode), dim, count, stacking
    )
    if mode is FieldMode.COMPLEX:
        flat = np.empty((count, 2 * dim), dtype="<f4")
        flat[:, 0::2] = batch.real
        flat[:, 1::2] = batch.imag
    else:
        flat = batch.astype("<f4")
    _atomic_write(path, head + flat.tobytes())


def read_csibin(path):
    """Read a CSIBIN file; returns (batch, mode, stacking)."""
    with open(path, "rb") as f:
        blob = f.read()
    if blob[:4] != CSIBIN_MAGIC:
        raise FormatError("not a CSIBIN file")
    ver, mode_b, dim, count, stacking = struct.unpack("<HBIQB", blob[4:20])
    if ver != FORMAT_VERSION:
        raise FormatError(f"unsupported CSIBIN version {ver}")
    mode = _mode_from_byte(mode_b)
    per = 2 if mode is FieldMode.COMPLEX else 1
    expect = 20 + count * dim * per * 4
    if len(blob) != expect:
        raise FormatError(
            f"CSIBIN payload length {len(blob) - 20} != expected {expect - 20}"
        )
    flat = np.frombuffer(blob, dtype="<f4", offset=20).reshape(count, per * dim)
    if mode is FieldMode.COMPLEX:
        batch = flat[:, 0::2].astype(np.float64) \
            + 1j * flat[:, 1::2].astype(np.float64)
    else:
        batch = flat.astype(np.float64)
    return batch, mode, stacking


def _gmtd_body(d):
    parts = [GMTD_MAGIC, struct.pack("<HBIId", FORMAT_VERSION,
                                     _mode_byte(d.mode), d.k, d.dim, d.floor)]
    for c in range(d.k):
        comp = d.components[c]
        parts.append(struct.pack("<d", float(d.weights[c])))
        parts.append(comp.values.astype("<f8").tobytes())
        cols = np.ravel(np.asarray(comp.vectors, dtype=np.complex128), order="F")
        inter = np.empty(2 * cols.shape[0], dtype="<f8")
        inter[0::2] = cols.real
        inter[1::2] = cols.imag
        parts.append(inter.tobytes())
        parts.append(d.quantizer_sigmas(c).astype("<f8").tobytes())
    return b"".join(parts)


def dictionary_hash(d):
    """FNV-1a hash of the dictionary's canonical serialization."""
    return backend.fnv1a64(_gmtd_body(d))


def write_gmtd(path, d):
    body = _gmtd_body(d)
    _atomic_write(path, body + struct.pack("<Q", backend.fnv1a64(body)))


def read_gmtd(path):
    with open(path, "rb") as f:
        blob = f.read()
    if blob[:4] != GMTD_MAGIC:
        raise FormatError("not a GMTD file")
    if len(blob) < 23:
        raise FormatError("GMTD truncated")
    ver, mode_b, k, n, floor = struct.unpack("<HBIId", blob[4:23])
    if ver != FORMAT_VERSION:
        raise FormatError(f"unsupported GMTD version {ver}")
    mode = _mode_from_byte(mode_b)
    per_comp = 8 + 8 * n + 16 * n * n + 8 * n
    expect = 23 + k * per_comp + 8
    if len(blob) != expect:
        raise FormatError("GMTD length inconsistent with header")
    stored = struct.unpack("<Q", blob[-8:])[0]
    if backend.fnv1a64(blob[:-8]) != stored:
        raise FormatError("GMTD hash mismatch (file corrupt)")
    weights = np.empty(k)
    comps = []
    off = 23
    for c in range(k):
        weights[c] = struct.unpack("<d", blob[off:off + 8])[0]
        off += 8
        vals = np.frombuffer(blob, dtype="<f8", count=n, offset=off).copy()
        off += 8 * n
        inter = np.frombuffer(blob, dtype="<f8", count=2 * n * n, offset=off)
        off += 16 * n * n
        cols = inter[0::2] + 1j * inter[1::2]
        vecs = cols.reshape(n, n, order="F")
        if mode is FieldMode.REAL:
            vecs = np.ascontiguousarray(vecs.real)
        else:
            vecs = np.ascontiguousarray(vecs)
        off += 8 * n  # quantizer sigmas are derivable; stored for the audit
        comps.append(EigenSystem(values=vals, vectors=vecs))
    return TransformDictionary(mode=mode, weights=weights,
                               components=tuple(comps), floor=floor)


def gmtd_scalar_count(path):
    """Count the serialized per-component real scalars of a GMTD file."""
    with open(path, "rb") as f:
        blob = f.read()
    if blob[:4] != GMTD_MAGIC:
        raise FormatError("not a GMTD file")
    _, _, k, n, _ = struct.unpack("<HBIId", blob[4:23])
    return {
        "k": int(k),
        "n": int(n),
        "eigenvector_reals": 2 * k * n * n,
        "eigenvalue_reals": k * n,
        "quantizer_metadata_reals": k * n,
        "model_params": 2 * k * n * n + 2 * k * n,
    }


def write_gmtb(path, enc, dict_hash):
    parts = [GMTB_MAGIC, struct.pack(
        "<HQdHQ", FORMAT_VERSION, dict_hash, enc.water_level, enc.tau,
        enc.n_blocks
    )]
    parts.append(struct.pack("<I", len(enc.label_stream.data)))
    parts.append(enc.label_stream.data)
    for g in enc.group_streams:
        parts.append(struct.pack("<I", len(g.data)))
        parts.append(g.data)
    _atomic_write(path, b"".join(parts))


def read_gmtb(path):
    """Returns (EncodedBatch, dict_hash)."""
    with open(path, "rb") as f:
        blob = f.read()
    if blob[:4] != GMTB_MAGIC:
        raise FormatError("not a GMTB file")
    if len(blob) < 32:
        raise FormatError("GMTB truncated")
    ver, dhash, mu, tau, n_blocks = struct.unpack("<HQdHQ", blob[4:32])
    if ver != FORMAT_VERSION:
        raise FormatError(f"unsupported GMTB version {ver}")
    if tau < 1:
        raise FormatError("GMTB header carries an invalid tau")
    off = 32

    def take_chunk():
        nonlocal off
        if off + 4 > len(blob):
            raise FormatError("GMTB truncated inside a chunk header")
        ln = struct.unpack("<I", blob[off:off + 4])[0]
        off += 4
        if off + ln > len(blob):
            raise FormatError("GMTB chunk extends past the file")
        data = blob[off:off + ln]
        off += ln
        return coder.Bitstream(data=data)

    label = take_chunk()
    n_groups = (n_blocks + tau - 1) // tau
    groups = tuple(take_chunk() for _ in range(n_groups))
    if off != len(blob):
        raise FormatError("GMTB has trailing bytes")
    enc = codec.EncodedBatch(water_level=mu, tau=tau, n_blocks=n_blocks,
                             label_stream=label, group_streams=groups)
    return enc, dhash


def write_labels(path, labels):
    labels = np.asarray(labels, dtype="<u4")
    head = CSIL_MAGIC + struct.pack("<HQ", FORMAT_VERSION, labels.shape[0])
    _atomic_write(path, head + labels.tobytes())


def read_labels(path):
    with open(path, "rb") as f:
        blob = f.read()
    if blob[:4] != CSIL_MAGIC:
        raise FormatError("not a CSIL file")
    ver, count = struct.unpack("<HQ", blob[4:14])
    if ver != FORMAT_VERSION:
        raise FormatError(f"unsupported CSIL version {ver}")
    if len(blob) != 14 + 4 * count:
        raise FormatError("CSIL length inconsistent with header")
    return np.frombuffer(blob, dtype="<u4", offset=14).astype(np.int64)
