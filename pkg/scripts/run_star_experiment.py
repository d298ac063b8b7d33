"""Amplitude-response experiment for the star construction.

Runs trial batches at zero amplitudes, at half the calibrated amplitudes,
and at the calibrated amplitudes, then a short multi-scale scan, and prints
event frequencies and the clique-ratio spread per batch.  This is the
summary experiment behind the shipped defaults; the CLI `star` and `scan`
commands expose the same machinery file-by-file.

Usage: python scripts/run_star_experiment.py [--grid 512] [--trials 50]
       [--workers 2] [--seed 20250810] [--scan-repeats 10] [--json out.json]
"""

import argparse
import dataclasses
import json

import numpy as np

from lqglab.rng import derive_seed
from lqglab.star import annulus_scan, default_config, monte_carlo


def batch_row(label, mc):
    finite = [r for r in mc.ratios if np.isfinite(r)]
    spread = (
        f"ratio p50={np.percentile(finite, 50):.4f} p90={np.percentile(finite, 90):.4f}"
        if finite
        else "ratio n/a"
    )
    freq = " ".join(f"{k}={mc.frequency(k):.2f}" for k in ("a1", "e_eta", "f", "g", "success"))
    print(f"  {label:<12} {freq}  {spread}")
    return {
        "label": label,
        "frequencies": {k: mc.frequency(k) for k in mc.counts},
        "ratios": [float(x) for x in finite],
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grid", type=int, default=512)
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--workers", type=int, default=2)
    ap.add_argument("--seed", type=int, default=20250810)
    ap.add_argument("--scan-repeats", type=int, default=10)
    ap.add_argument("--json", default=None)
    args = ap.parse_args()

    cfg = default_config(args.grid, seed=args.seed)
    print(f"grid {args.grid}, {args.trials} trials per batch, "
          f"m_out={cfg.m_out:.2f}, m_in={cfg.m_in:.2f}, c1={cfg.c1:.1f}")
    out = {"grid": args.grid, "trials": args.trials, "batches": []}
    for label, scale in (("zero", 0.0), ("half", 0.5), ("calibrated", 1.0)):
        tuned = dataclasses.replace(cfg, m_out=scale * cfg.m_out, m_in=scale * cfg.m_in)
        mc = monte_carlo(tuned, trials=args.trials, workers=args.workers)
        out["batches"].append(batch_row(label, mc))

    firsts = []
    for i in range(args.scan_repeats):
        scan = annulus_scan(derive_seed(args.seed, 555, i), cfg, max_depth=4)
        firsts.append(scan.first_success_depth)
    found = [f for f in firsts if f is not None]
    print(f"  scans: {len(found)}/{args.scan_repeats} succeeded within depth 4; "
          f"first-depth counts {dict((k, firsts.count(k)) for k in sorted(set(found)))}")
    out["scan_first_depths"] = firsts
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(out, fh, indent=2)


if __name__ == "__main__":
    main()
