"""Command-line interface.

Verbs: synth, fit, bounds, encode, decode, eval, rd-sweep, audit.
Exit codes: 0 success, 2 usage error (including infeasible targets),
3 data/format error, 4 invariant violation.  GMTC_THREADS caps sweep
parallelism.  Every run is reproducible from its arguments and seed,
both of which are echoed into emitted reports.
"""

import argparse
import json
import math
import sys
import time

import numpy as np

from . import __version__, channel, codec, formats, mixture, report
from .errors import (
    AllocationMismatch,
    CorruptStream,
    DegenerateFit,
    DictionaryMismatch,
    DimensionMismatch,
    EmptyDataset,
    FormatError,
    GmtcError,
    InfeasibleTarget,
    InvariantViolation,
    NonHermitianInput,
    SymbolOutOfSupport,
)
from .linalg import FieldMode

USAGE_ERRORS = (InfeasibleTarget,)
DATA_ERRORS = (FormatError, EmptyDataset, FileNotFoundError, IsADirectoryError,
               PermissionError)
INVARIANT_ERRORS = (InvariantViolation, CorruptStream, DictionaryMismatch,
                    AllocationMismatch, NonHermitianInput, DegenerateFit,
                    DimensionMismatch, SymbolOutOfSupport)


def _parse_grid(spec):
    """start:stop:count -> inclusive linspace; a bare number -> [number]."""
    if spec is None:
        return None
    parts = spec.split(":")
    if len(parts) == 1:
        return [float(parts[0])]
    if len(parts) != 3:
        raise InfeasibleTarget(f"grid must be start:stop:count, got {spec!r}")
    start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    if count < 1:
        raise InfeasibleTarget("grid count must be >= 1")
    return list(np.linspace(start, stop, count))


def _load_dictionary(path):
    return formats.read_gmtd(path)


def _echo(args, extra=None):
    cfg = {k: v for k, v in vars(args).items() if k != "func"}
    if extra:
        cfg.update(extra)
    return cfg


def cmd_synth(args):
    spec = channel.MixtureSpec.synthetic_log_uniform(
        k=args.k, n=args.dim, seed=args.seed,
        exp_low=args.exp_low, exp_high=args.exp_high,
    )
    d = mixture.dictionary_from_spec(spec)
    prefix = args.out_prefix
    total = args.n_train + args.n_test
    h, labels = channel.synth_mixture_dataset(spec, total, seed=args.seed)
    split = args.n_train
    stacking = formats.STACK_COMPLEX_KRON
    train, test = h[:split], h[split:]
    lab_train, lab_test = labels[:split], labels[split:]
    if args.segment:
        if (2 * args.dim) % args.segment:
            raise InfeasibleTarget("--segment must divide 2*dim")
        per = (2 * args.dim) // args.segment
        train = codec.segment_batch(codec.stack_real(train), args.segment)
        test = codec.segment_batch(codec.stack_real(test), args.segment)
        lab_train = np.repeat(lab_train, per)
        lab_test = np.repeat(lab_test, per)
        stacking = formats.STACK_REAL_SEGMENT
    elif args.mode == "real":
        train = codec.stack_real(train)
        test = codec.stack_real(test)
        stacking = formats.STACK_REAL_SPLIT
    formats.write_csibin(f"{prefix}-train.csibin", train, stacking=stacking)
    formats.write_csibin(f"{prefix}-test.csibin", test, stacking=stacking)
    formats.write_labels(f"{prefix}-train-labels.csil", lab_train)
    formats.write_labels(f"{prefix}-test-labels.csil", lab_test)
    formats.write_gmtd(f"{prefix}-dict.gmtd", d)
    print(json.dumps({
        "train": f"{prefix}-train.csibin", "test": f"{prefix}-test.csibin",
        "dict": f"{prefix}-dict.gmtd", "k": args.k, "dim": args.dim,
        "seed": args.seed, "n_train": int(train.shape[0]),
        "n_test": int(test.shape[0]),
    }))


def _maybe_segment(data, mode, m):
    if not m:
        return data, mode
    if mode is not FieldMode.REAL:
        data = codec.stack_real(data)
    return codec.segment_batch(data, m), FieldMode.REAL


def cmd_fit(args):
    data, mode, _ = formats.read_csibin(args.train)
    data, mode = _maybe_segment(data, mode, args.segment)
    cfg = mixture.EmConfig(k=args.k, max_iters=args.max_iters, tol=args.tol,
                           reg=args.reg, seed=args.seed, init=args.init)
    t0 = time.time()
    model, trace = mixture.em_fit(data, cfg)
    d = mixture.build_dictionary(model)
    formats.write_gmtd(args.out, d)
    info = {
        "out": args.out, "k_fitted": d.k, "dim": d.dim,
        "iterations": len(trace), "final_avg_loglik": trace[-1],
        "runtime_sec": time.time() - t0, "seed": args.seed,
    }
    if args.trace_out:
        with open(args.trace_out, "w") as f:
            json.dump({"avg_loglik": trace, **info}, f, indent=2)
    else:
        print(json.dumps({"avg_loglik_trace": trace}), file=sys.stderr)
    if args.audit:
        info["audit"] = _audit_dict(args.out)
    print(json.dumps(info))


def _audit_dict(path):
    counts = formats.gmtd_scalar_count(path)
    k, n = counts["k"], counts["n"]
    formula = 2 * k * n * n + 2 * k * n
    counts["formula_2KN2_plus_2KN"] = formula
    from . import coder

    counts["lookup_scalars"] = int(coder.QUANT_LOOKUP_RATIOS.size
                                   + coder.QUANT_LOOKUP_BITS.size)
    counts["total_with_lookup"] = counts["model_params"] \
        + counts["lookup_scalars"]
    if counts["model_params"] != formula:
        raise InvariantViolation(
            f"dictionary scalar count {counts['model_params']} != {formula}"
        )
    return counts


def cmd_audit(args):
    counts = _audit_dict(args.dict)
    counts["online_memory_bytes_8KN2"] = 8 * counts["k"] * counts["n"] ** 2
    measured, formula = codec.count_encoder_flops(counts["n"])
    counts["encoder_flops_formula_N2_plus_4N"] = formula
    counts["encoder_ops_measured"] = measured
    if not 0.5 <= measured / formula <= 2.0:
        raise InvariantViolation(
            f"measured encoder ops {measured} outside 2x of formula {formula}"
        )
    print(json.dumps(counts, indent=2))


def cmd_bounds(args):
    d = _load_dictionary(args.dict)
    rep = report.bounds_report(
        d, rates=_parse_grid(args.grid_rate),
        distortions=_parse_grid(args.grid_dist),
        water_levels=_parse_grid(args.grid_mu),
        tau=args.tau, seed=args.seed, config_echo=_echo(args),
    )
    csv_path = report.write_report(args.out, rep)
    print(json.dumps({"report": args.out, "csv": csv_path}))


def _resolve_allocation(d, args):
    n_targets = sum(x is not None
                    for x in (args.rate, args.distortion, args.water_level))
    if n_targets != 1:
        raise InfeasibleTarget(
            "specify exactly one of --rate, --distortion, --water-level"
        )
    return codec.allocation_for(d, rate=args.rate, distortion=args.distortion,
                                water_level=args.water_level)


def cmd_encode(args):
    d = _load_dictionary(args.dict)
    data, mode, _ = formats.read_csibin(args.data)
    if mode is not d.mode:
        raise DimensionMismatch("data field mode differs from dictionary")
    alloc = _resolve_allocation(d, args)
    labels = formats.read_labels(args.labels) if args.labels else None
    cfg = codec.EncoderConfig(dictionary=d, allocation=alloc, tau=args.tau)
    enc, rep = codec.encode_batch(cfg, data, labels=labels)
    formats.write_gmtb(args.out, enc, formats.dictionary_hash(d))
    rep.pop("counters", None)
    print(json.dumps({"out": args.out, **rep}))


def cmd_decode(args):
    d = _load_dictionary(args.dict)
    enc, stored_hash = formats.read_gmtb(args.bits)
    if stored_hash != formats.dictionary_hash(d):
        raise DictionaryMismatch(
            "bitstream was produced under a different dictionary"
        )
    alloc = codec.allocation_for(d, water_level=enc.water_level)
    recon = codec.decode_batch(d, alloc, enc)
    formats.write_csibin(args.out, recon)
    print(json.dumps({"out": args.out, "blocks": enc.n_blocks}))


def cmd_eval(args):
    if args.identity:
        data, mode, stacking = formats.read_csibin(args.data)
        formats.write_csibin(args.out, data, stacking=stacking)
        print(json.dumps({"out": args.out, "count": int(data.shape[0])}))
        return
    a, _, _ = formats.read_csibin(args.data)
    b, _, _ = formats.read_csibin(args.recon)
    if a.shape != b.shape:
        raise DimensionMismatch("original and reconstruction differ in shape")
    err = np.sum(np.abs(a - b) ** 2)
    energy = np.sum(np.abs(a) ** 2)
    nmse = float(err / energy) if energy > 0 else 0.0
    out = {
        "mse_per_dim": float(np.mean(np.abs(a - b) ** 2)),
        "nmse_db": 10 * math.log10(nmse) if nmse > 0 else -math.inf,
        "count": int(a.shape[0]),
        "dim": int(a.shape[1]),
    }
    if args.out:
        with open(args.out, "w") as f:
            json.dump(out, f, indent=2)
    print(json.dumps(out))


def cmd_rd_sweep(args):
    d = _load_dictionary(args.dict)
    data, mode, _ = formats.read_csibin(args.data)
    data, mode = _maybe_segment(data, mode, args.segment)
    if mode is not d.mode:
        raise DimensionMismatch("data field mode differs from dictionary")
    schemes = [s.strip() for s in args.schemes.split(",") if s.strip()]
    bad = set(schemes) - set(report.SCHEMES)
    if bad:
        raise InfeasibleTarget(f"unknown schemes: {sorted(bad)}")
    labels = formats.read_labels(args.labels) if args.labels else None
    train = formats.read_csibin(args.train)[0] if args.train else None
    if train is not None and args.segment:
        tmode = FieldMode.COMPLEX if np.iscomplexobj(train) else FieldMode.REAL
        train, _ = _maybe_segment(train, tmode, args.segment)
    rates = _parse_grid(args.grid_rate)
    if rates is None:
        raise InfeasibleTarget("rd-sweep needs --grid-rate")
    rep = report.rd_sweep(d, data, rates, tau=args.tau, schemes=schemes,
                          labels=labels, train=train, seed=args.seed,
                          config_echo=_echo(args))
    csv_path = report.write_report(args.out, rep)
    print(json.dumps({"report": args.out, "csv": csv_path,
                      "runtime_sec": rep["runtime_sec"]}))


def build_parser():
    p = argparse.ArgumentParser(
        prog="gmtc",
        description="Gaussian-mixture transform coding toolkit",
    )
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("synth", help="generate a synthetic mixture dataset")
    s.add_argument("--k", type=int, default=8)
    s.add_argument("--dim", type=int, default=64)
    s.add_argument("--n-train", type=int, default=80_000)
    s.add_argument("--n-test", type=int, default=20_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--exp-low", type=float, default=-2.0)
    s.add_argument("--exp-high", type=float, default=2.0)
    s.add_argument("--mode", choices=("complex", "real"), default="complex",
                   help="real emits [Re; Im]-stacked vectors of dim 2N")
    s.add_argument("--segment", type=int, default=0,
                   help="emit real-stacked M-dim segments instead of complex vectors")
    s.add_argument("--out-prefix", required=True)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("fit", help="EM-fit a mixture and write the dictionary")
    s.add_argument("--train", required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--max-iters", type=int, default=300)
    s.add_argument("--tol", type=float, default=1e-6)
    s.add_argument("--reg", type=float, default=1e-6)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--init", choices=("kmeans", "random"), default="kmeans")
    s.add_argument("--segment", type=int, default=0,
                   help="real-stack and segment rows into M-dim blocks first")
    s.add_argument("--trace-out")
    s.add_argument("--audit", action="store_true")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("bounds", help="theoretical RD bound curves")
    s.add_argument("--dict", required=True)
    s.add_argument("--tau", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--grid-rate")
    g.add_argument("--grid-dist")
    g.add_argument("--grid-mu")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_bounds)

    s = sub.add_parser("encode", help="encode a batch into a GMTB container")
    s.add_argument("--dict", required=True)
    s.add_argument("--data", required=True)
    s.add_argument("--rate", type=float)
    s.add_argument("--distortion", type=float)
    s.add_argument("--water-level", type=float)
    s.add_argument("--tau", type=int, default=1)
    s.add_argument("--labels", help="oracle labels (CSIL) instead of MAP")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_encode)

    s = sub.add_parser("decode", help="decode a GMTB container")
    s.add_argument("--dict", required=True)
    s.add_argument("--bits", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_decode)

    s = sub.add_parser("eval", help="compare two CSIBIN files (or round-trip one)")
    s.add_argument("--data", required=True)
    s.add_argument("--recon")
    s.add_argument("--identity", action="store_true")
    s.add_argument("--out")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("rd-sweep", help="empirical RD curves for several schemes")
    s.add_argument("--dict", required=True)
    s.add_argument("--data", required=True)
    s.add_argument("--grid-rate", required=True)
    s.add_argument("--tau", type=int, default=1)
    s.add_argument("--segment", type=int, default=0,
                   help="real-stack and segment rows into M-dim blocks first")
    s.add_argument("--schemes", default="map")
    s.add_argument("--labels")
    s.add_argument("--train")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_rd_sweep)

    s = sub.add_parser("audit", help="parameter/flops accounting for a dictionary")
    s.add_argument("--dict", required=True)
    s.set_defaults(func=cmd_audit)

    return p


def main(argv=None):
    p = build_parser()
    args = p.parse_args(argv)
    try:
        args.func(args)
    except USAGE_ERRORS as e:
        print(f"gmtc: {e}", file=sys.stderr)
        return 2
    except DATA_ERRORS as e:
        print(f"gmtc: {e}", file=sys.stderr)
        return 3
    except INVARIANT_ERRORS as e:
        print(f"gmtc: {e}", file=sys.stderr)
        return 4
    except GmtcError as e:
        print(f"gmtc: {e}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
