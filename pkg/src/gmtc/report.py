"""RD-sweep orchestration and machine-readable result emission.

Produces the report documents behind the benchmark curves: theoretical
bound points, empirical codec runs per scheme, and the JSON/CSV files
the plotting component consumes.  Every empirical point is checked
against the genie-aided bound; a violation fails the run.
"""

import csv
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .codec import EncoderConfig, allocation_for, encode_batch, pooled_spectrum, \
    tc_baseline_fit_encode
from .errors import InvariantViolation
from .rdtheory import label_overhead, solve_water_level

SCHEMES = ("map", "oracle-label", "tc")


def thread_count():
    try:
        return max(1, int(os.environ.get("GMTC_THREADS", "1")))
    except ValueError:
        return 1


def _pmap(fn, items):
    n = thread_count()
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def theoretical_point(dictionary, alloc, tau):
    spec = pooled_spectrum(dictionary)
    power = spec.source_power()
    shift = label_overhead(dictionary.weights, tau, dictionary.dim)
    nmse = alloc.distortion / power if power > 0 else 0.0
    return {
        "r_cond": alloc.rate,
        "r_gmtc_upper": alloc.rate + shift,
        "distortion": alloc.distortion,
        "nmse_db": 10 * math.log10(nmse) if nmse > 0 else -math.inf,
        "label_overhead": shift,
    }


def _check_bound(dictionary, rate_emp, mse_emp, scheme):
    spec = pooled_spectrum(dictionary)
    if mse_emp <= 0 or mse_emp >= spec.source_power():
        return
    bound = solve_water_level(spec, distortion=mse_emp).rate
    if rate_emp < bound - 1e-9:
        raise InvariantViolation(
            f"{scheme}: empirical rate {rate_emp:.6f} undercuts the "
            f"conditional bound {bound:.6f} at its own distortion"
        )


def empirical_point(dictionary, data, rate, tau, labels=None, truth=None):
    alloc = allocation_for(dictionary, rate=rate)
    cfg = EncoderConfig(dictionary=dictionary, allocation=alloc, tau=tau)
    _, rep = encode_batch(cfg, data, labels=labels, truth=truth)
    return alloc, rep

def _empirical_entry(rep):
    out = {
        "rate_bits_per_dim": rep["rate_bits_per_dim"],
        "mse": rep["mse_per_dim"],
        "nmse_db": rep["nmse_db"],
        "label_bits_per_dim": rep["label_bits_per_dim"],
    }
    if "map_accuracy" in rep:
        out["map_accuracy"] = rep["map_accuracy"]
    return out


def rd_sweep(dictionary, data, rates, tau=1, schemes=("map",), labels=None,
             train=None, seed=0, config_echo=None):
    """Run the enabled schemes over a rate grid; returns the report dict."""
    t0 = time.time()
    curves = []

    def gmtc_point(rate, oracle):
        alloc, rep = empirical_point(
            dictionary, data, rate, tau,
            labels=labels if oracle else None,
            truth=None if oracle else labels,
        )
        scheme = "oracle-label" if oracle else "map"
        _check_bound(dictionary, rep["rate_bits_per_dim"], rep["mse_per_dim"],
                     scheme)
        return {
            "target": rate,
            "water_level": alloc.water_level,
            "theoretical": theoretical_point(dictionary, alloc, tau),
            "empirical": _empirical_entry(rep),
        }

    if "map" in schemes:
        pts = _pmap(lambda r: gmtc_point(r, False), list(rates))
        curves.append({"scheme": "map", "points": pts})
    if "oracle-label" in schemes:
        if labels is None:
            raise InvariantViolation("oracle-label scheme needs ground-truth labels")
        pts = _pmap(lambda r: gmtc_point(r, True), list(rates))
        curves.append({"scheme": "oracle-label", "points": pts})
    if "tc" in schemes:
        if train is None:
            raise InvariantViolation("tc scheme needs a training batch")
        tc_dict, tc_reports = tc_baseline_fit_encode(train, data, rates,
                                                     tau=tau, seed=seed)
        pts = []
        for r, rep in zip(rates, tc_reports):
            if "counters" in rep:
                _check_bound(tc_dict, rep["rate_bits_per_dim"],
                             rep["mse_per_dim"], "tc")
            alloc = allocation_for(dictionary, rate=r) if r > 0 else None
            pts.append({
                "target": r,
                "water_level": rep.get("water_level", math.nan),
                "theoretical": theoretical_point(dictionary, alloc, tau)
                if alloc is not None else None,
                "empirical": {
                    "rate_bits_per_dim": rep["rate_bits_per_dim"],
                    "mse": rep["mse_per_dim"],
                    "nmse_db": rep["nmse_db"],
                    "label_bits_per_dim": rep.get("label_bits_per_dim", 0.0),
                },
            })
        curves.append({"scheme": "tc", "points": pts})
    return {
        "config": config_echo or {},
        "seed": seed,
        "tau": tau,
        "dim": dictionary.dim,
        "k": dictionary.k,
        "curves": curves,
        "runtime_sec": time.time() - t0,
    }


def bounds_report(dictionary, rates=None, distortions=None, water_levels=None,
                  tau=1, seed=0, config_echo=None):
    """Theoretical-only report over a grid."""
    t0 = time.time()
    spec = pooled_spectrum(dictionary)
    allocs = []
    if rates is not None:
        allocs = [(r, solve_water_level(spec, rate=r)) for r in rates]
    elif distortions is not None:
        allocs = [(d, solve_water_level(spec, distortion=d))
                  for d in distortions]
    else:
        from .rdtheory import waterfill_at_level

        allocs = [(mu, waterfill_at_level(spec, mu)) for mu in water_levels]
    pts = [{
        "target": tgt,
        "water_level": alloc.water_level,
        "theoretical": theoretical_point(dictionary, alloc, tau),
        "empirical": None,
    } for tgt, alloc in allocs]
    return {
        "config": config_echo or {},
        "seed": seed,
        "tau": tau,
        "dim": dictionary.dim,
        "k": dictionary.k,
        "curves": [{"scheme": "theory", "points": pts}],
        "runtime_sec": time.time() - t0,
    }


_CSV_FIELDS = ["scheme", "target", "water_level", "r_cond", "r_gmtc_upper",
               "theory_nmse_db", "rate_bits_per_dim", "mse", "nmse_db",
               "label_bits_per_dim", "map_accuracy"]


def write_report(path, report):
    """Write the JSON report and its CSV mirror (same basename)."""
    def _clean(x):
        if isinstance(x, float) and math.isinf(x):
            return "-inf" if x < 0 else "inf"
        return x

    with open(path, "w") as f:
        json.dump(report, f, indent=2, default=_clean)
        f.write("\n")
    csv_path = os.path.splitext(path)[0] + ".csv"
    with open(csv_path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=_CSV_FIELDS)
        w.writeheader()
        for curve in report.get("curves", []):
            for p in curve["points"]:
                row = {"scheme": curve["scheme"], "target": p.get("target"),
                       "water_level": p.get("water_level")}
                th = p.get("theoretical") or {}
                row["r_cond"] = th.get("r_cond")
                row["r_gmtc_upper"] = th.get("r_gmtc_upper")
                row["theory_nmse_db"] = th.get("nmse_db")
                em = p.get("empirical") or {}
                row["rate_bits_per_dim"] = em.get("rate_bits_per_dim")
                row["mse"] = em.get("mse")
                row["nmse_db"] = em.get("nmse_db")
                row["label_bits_per_dim"] = em.get("label_bits_per_dim")
                row["map_accuracy"] = em.get("map_accuracy")
                w.writerow(row)
    return csv_path
