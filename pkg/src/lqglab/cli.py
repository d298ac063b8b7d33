"""Command-line front end: sample fields, query metrics, run experiments.

Exit codes: 0 success, 2 usage, 3 I/O, 4 malformed input file, 5 grid
resolution too coarse for the requested construction.  Every command writes
a manifest JSON beside its outputs recording the resolved configuration,
seeds, and content hashes, so a run can be reproduced byte for byte.
"""

import argparse
import dataclasses
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    assouad_estimate,
    doubling_constant,
    find_clique,
    read_distance_csv,
    read_points_csv,
    write_assouad_csv,
    write_clique_csv,
)
from .errors import FormatError, ParameterError, ResolutionError
from .field import sample_whole_plane_proxy, sample_zero_boundary
from .lqgf import read_lqgf, write_lqgf
from .metric import build_metric, diameter, distance, distance_field, geodesic, metric_ball, write_path_csv
from .params import make_params
from .star import StarConfig, annulus_scan, monte_carlo
from .rng import derive_seed

__all__ = ["main"]


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def _config_jsonable(cfg) -> dict:
    out = {}
    for key, val in dataclasses.asdict(cfg).items():
        out[key] = str(val) if isinstance(val, complex) else val
    return out


def write_manifest(path: Path, command: str, config: dict, seeds, outputs) -> None:
    doc = {
        "command": command,
        "version": __version__,
        "config": config,
        "seeds": list(int(s) for s in seeds),
        "outputs": [{"path": p.name, "sha256": _sha256(p)} for p in outputs],
    }
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def write_pgm(path: Path, array: np.ndarray) -> None:
    """P5 portable graymap, 16-bit big-endian samples, min-max scaled.

    Raster rows run top to bottom, so the grid (row 0 at the origin corner)
    is flipped vertically.
    """
    a = np.asarray(array, dtype=np.float64)
    finite = np.isfinite(a)
    if not finite.all():
        cap = a[finite].max() if finite.any() else 0.0
        a = np.where(finite, a, cap)
    lo, hi = a.min(), a.max()
    scaled = np.zeros_like(a) if hi == lo else (a - lo) / (hi - lo)
    pix = np.round(scaled * 65535.0).astype(">u2")
    h, w = a.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n65535\n".encode("ascii"))
        fh.write(pix[::-1].tobytes())


# --------------------------------------------------------------------------
# star config files (flat key=value, keys mirror StarConfig fields)

_CONFIG_PARSERS = {
    "n_arms": int,
    "z0": complex,
    "r": float,
    "delta": float,
    "epsilon": float,
    "m_out": float,
    "m_in": float,
    "u": float,
    "eta": float,
    "c1": float,
    "c2": float,
    "t": float,
    "grid_n": int,
    "cutoff": int,
    "seed": int,
    "gamma": float,
    "d_gamma": float,
    "pad_factor": int,
    "allowance": lambda s: None if s.lower() == "none" else float(s),
}


def load_star_config(path) -> StarConfig:
    values = {}
    for ln_no, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"{path}:{ln_no}: expected key=value, got {raw!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        if key not in _CONFIG_PARSERS:
            raise ParameterError(f"{path}:{ln_no}: unknown config key {key!r}")
        try:
            values[key] = _CONFIG_PARSERS[key](val)
        except ValueError as exc:
            raise ParameterError(f"{path}:{ln_no}: bad value for {key}: {exc}") from None
    return StarConfig(**values)


def _default_workers() -> int:
    env = os.environ.get("LQGLAB_WORKERS")
    return int(env) if env else 1


# --------------------------------------------------------------------------
# subcommands

def cmd_sample(args) -> int:
    if args.kind == "zero":
        field = sample_zero_boundary(args.n, args.cutoff, args.seed)
    else:
        field = sample_whole_plane_proxy(args.n, args.pad, args.cutoff, args.seed)
    out = Path(args.out)
    write_lqgf(field, out)
    config = {
        "n": args.n,
        "cutoff": args.cutoff,
        "seed": args.seed,
        "kind": args.kind,
        "pad": args.pad,
    }
    write_manifest(out.with_suffix(out.suffix + ".manifest.json"), "sample", config, [args.seed], [out])
    return 0


def _run_query(wg, spec: str, out_stem: Path, index: int, rows: list) -> None:
    parts = spec.split()
    kind = parts[0] if parts else ""
    try:
        nums = [int(x) for x in parts[1:]] if kind != "ball" else None
        if kind == "distance" and len(parts) == 5:
            a, b = (nums[0], nums[1]), (nums[2], nums[3])
            rows.append((index, "distance", spec, distance(wg, a, b)))
        elif kind == "geodesic" and len(parts) == 5:
            a, b = (nums[0], nums[1]), (nums[2], nums[3])
            path = geodesic(wg, a, b)
            rows.append((index, "geodesic", spec, np.inf if path is None else path.length))
            if path is not None:
                write_path_csv(out_stem.with_suffix(f".path{index}.csv"), path)
        elif kind == "diameter" and len(parts) >= 5 and (len(parts) - 1) % 2 == 0:
            verts = [(nums[i], nums[i + 1]) for i in range(0, len(nums), 2)]
            rows.append((index, "diameter", spec, diameter(wg, verts)))
        elif kind == "ball" and len(parts) == 4:
            r, c, s = int(parts[1]), int(parts[2]), float(parts[3])
            rows.append((index, "ball", spec, float(metric_ball(wg, (r, c), s).sum())))
        else:
            raise ParameterError(f"bad query {spec!r}; see --help for the grammar")
    except ValueError:
        raise ParameterError(f"bad query {spec!r}: expected integer vertices") from None


def cmd_metric(args) -> int:
    field = read_lqgf(args.field)
    params = make_params(args.gamma, args.d_gamma)
    wg = build_metric(field, params)
    out = Path(args.out)
    rows: list = []
    for index, spec in enumerate(args.query):
        _run_query(wg, spec, out, index, rows)
    with open(out, "w", newline="\n") as fh:
        fh.write("query,kind,args,value\n")
        for index, kind, spec, value in rows:
            fh.write(f"{index},{kind},{spec},{_fmt(value)}\n")
    config = {"field": str(args.field), "gamma": args.gamma, "d_gamma": args.d_gamma,
              "queries": list(args.query)}
    write_manifest(out.with_suffix(out.suffix + ".manifest.json"), "metric", config,
                   [field.seed], [out])
    return 0


_TRIAL_COLUMNS = [
    "trial", "seed", "a1", "e_eta", "f", "g", "success", "failure", "ratio",
    "allowance", "d_rings", "d_star_internal", "diam_ball2", "diam_certificate",
    "a1_inf", "e_inf", "e_threshold", "f_sup", "f_diam_inner", "zeta", "points",
]


def _trial_row(i: int, res) -> str:
    ev = res.events
    points = (
        "" if res.points is None else "|".join(f"{r}:{c}" for r, c in res.points)
    )
    vals = [
        str(i), str(res.seed), str(int(ev.a1)), str(int(ev.e_eta)), str(int(ev.f)),
        str(int(ev.g)), str(int(res.success)), res.failure or "", _fmt(res.ratio),
        _fmt(res.allowance), _fmt(ev.d_rings), _fmt(ev.d_star_internal),
        _fmt(ev.diam_ball2), ev.diam_certificate, _fmt(ev.a1_inf), _fmt(ev.e_inf),
        _fmt(ev.e_threshold), _fmt(ev.f_sup), _fmt(ev.f_diam_inner), _fmt(ev.zeta),
        points,
    ]
    return ",".join(vals)


def _write_trials_csv(path: Path, results) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(_TRIAL_COLUMNS) + "\n")
        for i, res in enumerate(results):
            fh.write(_trial_row(i, res) + "\n")


def _emit_heatmaps(config: StarConfig, out_dir: Path) -> list:
    """Modified field of the first trial plus distances from the center."""
    from .field import add_function, make_bump
    from .geometry import DiscRegion, RegionDifference, StarRegion
    from .star import build_star

    cfg = dataclasses.replace(config, seed=derive_seed(config.seed, 0))
    field = sample_whole_plane_proxy(cfg.grid_n, cfg.pad_factor, cfg.cutoff, cfg.seed)
    star = build_star(cfg)
    psi = make_bump(
        field,
        RegionDifference(DiscRegion(cfg.z0, 7 * cfg.r), StarRegion(star, beta=cfg.epsilon / 2)),
        RegionDifference(DiscRegion(cfg.z0, 8 * cfg.r), StarRegion(star, beta=cfg.epsilon)),
        cfg.m_out,
    )
    sigma = make_bump(
        field,
        DiscRegion(cfg.z0, (2 - cfg.u / 2) * cfg.r),
        DiscRegion(cfg.z0, 2 * cfg.r),
        -cfg.m_in,
    )
    modified = add_function(add_function(field, psi), sigma)
    wg = build_metric(modified, make_params(cfg.gamma, cfg.d_gamma))
    col = int(round((cfg.z0.real - wg.origin.real) / wg.spacing))
    row = int(round((cfg.z0.imag - wg.origin.imag) / wg.spacing))
    dist, _, _ = distance_field(wg, [(row, col)])
    field_pgm = out_dir / "field.pgm"
    dist_pgm = out_dir / "dist.pgm"
    write_pgm(field_pgm, modified.values)
    write_pgm(dist_pgm, dist)
    return [field_pgm, dist_pgm]


def cmd_star(args) -> int:
    config = load_star_config(args.config)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    result = monte_carlo(config, trials=args.trials, workers=args.workers)
    trials_csv = out_dir / "trials.csv"
    _write_trials_csv(trials_csv, result.results)
    edges, hist = result.ratio_histogram()
    summary = {
        "trials": result.trials,
        "counts": result.counts,
        "frequencies": {k: v / result.trials for k, v in result.counts.items()},
        "ratios": [float(x) for x in result.ratios],
        "ratio_histogram": {
            "edges": [float(e) for e in edges],
            "counts": [int(c) for c in hist],
        },
    }
    summary_path = out_dir / "summary.json"
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    outputs = [trials_csv, summary_path]
    if args.heatmap:
        outputs += _emit_heatmaps(config, out_dir)
    seeds = [r.seed for r in result.results]
    write_manifest(out_dir / "manifest.json", "star", _config_jsonable(config), seeds, outputs)
    return 0


def cmd_scan(args) -> int:
    config = load_star_config(args.config)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    scan = annulus_scan(args.base_seed, config, args.depth)
    scan_csv = out_dir / "scan.csv"
    with open(scan_csv, "w", newline="\n") as fh:
        fh.write("depth,seed,center_re,r_scale," + ",".join(_TRIAL_COLUMNS[2:]) + "\n")
        for rec in scan.trials:
            head = f"{rec.depth},{rec.seed},{_fmt(rec.center.real)},{_fmt(rec.r_scale)}"
            tail = _trial_row(0, rec.result).split(",", 2)[2]
            fh.write(head + "," + tail + "\n")
    summary = {
        "first_success_depth": scan.first_success_depth,
        "depths_run": len(scan.trials),
        "resolution_note": scan.resolution_note,
    }
    summary_path = out_dir / "summary.json"
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    write_manifest(
        out_dir / "manifest.json",
        "scan",
        dict(_config_jsonable(config), base_seed=args.base_seed, depth=args.depth),
        [args.base_seed],
        [scan_csv, summary_path],
    )
    return 0


def _analyze_metric(args):
    if args.matrix and args.points:
        raise ParameterError("give either --matrix or --points, not both")
    if args.matrix:
        return read_distance_csv(args.matrix), {"matrix": str(args.matrix)}
    if args.points:
        return read_points_csv(args.points), {"points": str(args.points)}
    raise ParameterError("analyze requires --matrix or --points")


def _default_scale_pairs(fm):
    d = fm.dist
    off = d[~np.eye(len(fm), dtype=bool)]
    big_r = float(off.max()) / 4.0
    return [(big_r, big_r / ratio) for ratio in (2.0, 4.0, 8.0, 16.0, 32.0)]


def cmd_analyze(args) -> int:
    fm, source = _analyze_metric(args)
    out = Path(args.out)
    if args.op == "assouad":
        write_assouad_csv(out, assouad_estimate(fm, _default_scale_pairs(fm)))
    elif args.op == "clique":
        write_clique_csv(out, find_clique(fm, args.size, args.k), args.size, args.k)
    else:  # doubling
        scales = [float(s) for s in args.scales.split(",")] if args.scales else None
        if scales is None:
            off = fm.dist[~np.eye(len(fm), dtype=bool)]
            scales = [float(off.max()) / 2.0]
        constant = doubling_constant(fm, range(len(fm)), scales)
        with open(out, "w", newline="\n") as fh:
            fh.write("doubling_constant,scales\n")
            fh.write(f"{constant},{'|'.join(_fmt(s) for s in scales)}\n")
    config = dict(source, op=args.op)
    write_manifest(out.with_suffix(out.suffix + ".manifest.json"), "analyze", config, [], [out])
    return 0


# --------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="lqglab", description=__doc__)
    top.add_argument("--version", action="version", version=__version__)
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="sample a field and write an LQGF file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--cutoff", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--kind", choices=["zero", "proxy"], default="zero")
    p.add_argument("--pad", type=int, default=4)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("metric", help="answer distance queries against a field file")
    p.add_argument("--field", required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--d-gamma", dest="d_gamma", type=float, required=True)
    p.add_argument(
        "--query",
        action="append",
        default=[],
        required=True,
        help="'distance r1 c1 r2 c2' | 'geodesic r1 c1 r2 c2' | "
        "'diameter r1 c1 r2 c2 ...' | 'ball r c s'",
    )
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_metric)

    p = sub.add_parser("star", help="run star trials from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--workers", type=int, default=_default_workers())
    p.add_argument("--out-dir", required=True)
    p.add_argument("--heatmap", action="store_true")
    p.set_defaults(func=cmd_star)

    p = sub.add_parser("scan", help="multi-scale annulus scan")
    p.add_argument("--config", required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--base-seed", dest="base_seed", type=int, required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("analyze", help="finite-metric analysis of a matrix or point file")
    p.add_argument("--matrix")
    p.add_argument("--points")
    p.add_argument("--op", choices=["assouad", "clique", "doubling"], required=True)
    p.add_argument("--size", type=int, default=3, help="clique size for --op clique")
    p.add_argument("--k", type=float, default=2.0, help="ratio bound for --op clique")
    p.add_argument("--scales", default=None, help="comma list of radii for --op doubling")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_analyze)
    return top


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse uses 2 for usage errors
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ParameterError as exc:
        print(f"lqglab: {exc}", file=sys.stderr)
        return 2
    except FormatError as exc:
        print(f"lqglab: format error: {exc}", file=sys.stderr)
        return 4
    except ResolutionError as exc:
        print(f"lqglab: resolution error: {exc}", file=sys.stderr)
        return 5
    except OSError as exc:
        print(f"lqglab: i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
