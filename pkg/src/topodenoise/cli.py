"""Command-line surface composing the library into full experiments.

Subcommands: synth, denoise, threshold, barcode, compare, render-scatter,
from-manifest. Every run writes its outputs plus a ``run.json`` manifest
recording the subcommand, all parameters and seeds, the kernel backend,
and computed values (normalization constant, acceptance rate, ...).
``from-manifest`` re-executes a manifest; all outputs except the manifest
itself are reproduced byte-identically.

Exit codes: 0 success, 2 validation error, 3 degenerate input,
4 resource cap exceeded.
"""

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, _backend
from .denoise import DenoiseParams, denoise_run
from .density import knn_density, threshold_top
from .errors import ComplexSizeError, DegenerateFieldError, ValidationError
from .geometry import PointCloud, random_subset, read_csv, write_csv
from .homology import (Barcode, DEFAULT_SIMPLEX_CAP, barcode_stats,
                       lazy_witness_complex, persistence, rips_complex,
                       select_landmarks)
from .kernelfield import FieldParams
from .synth import NoisyShapeSpec, rejection_sample

_EXIT_VALIDATION = 2
_EXIT_DEGENERATE = 3
_EXIT_RESOURCE = 4


# -- small helpers -----------------------------------------------------------

def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        if math.isnan(obj):
            return "nan"
        return obj
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return _json_safe(float(obj))
    return obj


def _write_json(obj, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_json_safe(obj), fh, sort_keys=True, indent=2)
        fh.write("\n")


def _stats_dict(stats) -> dict:
    return {
        "n_intervals": len(stats.effective_lengths),
        "n_infinite": stats.n_infinite,
        "finite_lengths": list(stats.finite_lengths),
        "effective_lengths": list(stats.effective_lengths),
        "prominence": stats.prominence,
        "uses_effective_lengths": stats.uses_effective_lengths,
        "truncation_limited": stats.truncation_limited,
    }


def _barcode_json(barcode: Barcode) -> list:
    out = []
    for iv in barcode.intervals:
        out.append({"dim": iv.dim, "birth": iv.birth,
                    "death": iv.death if iv.finite else None})
    return out


def _write_barcode_files(barcode: Barcode, out_dir: Path, stem: str = "barcode"):
    _write_json(_barcode_json(barcode), out_dir / f"{stem}.json")
    stats = {str(d): _stats_dict(barcode_stats(barcode, d))
             for d in range(barcode.max_dim + 1)}
    _write_json({"max_filtration": barcode.max_filtration,
                 "max_dim": barcode.max_dim,
                 "n_zero_length": barcode.n_zero_length,
                 "dims": stats},
                out_dir / f"{stem}_stats.json")
    (out_dir / f"{stem}.svg").write_text(_barcode_svg(barcode), encoding="utf-8")
    (out_dir / f"{stem}.txt").write_text(_barcode_text(barcode), encoding="utf-8")
    return stats


# -- renderers ---------------------------------------------------------------

_SVG_W = 640
_MARGIN_L, _MARGIN_R, _ROW_H, _PANEL_PAD = 50, 30, 14, 42


def _barcode_svg(barcode: Barcode) -> str:
    """One panel per homology degree, one horizontal bar per interval.

    The x axis is the filtration scale; essential classes run to the right
    margin and end with an arrowhead.
    """
    span = barcode.max_filtration if barcode.max_filtration > 0 else 1.0
    x0, x1 = _MARGIN_L, _SVG_W - _MARGIN_R

    def sx(v: float) -> float:
        return x0 + (x1 - x0) * min(v, span) / span

    parts = []
    y = 10
    for dim in range(barcode.max_dim + 1):
        bars = sorted(barcode.in_dim(dim),
                      key=lambda iv: (iv.birth, iv.death - iv.birth))
        parts.append(f'<text x="{x0}" y="{y + 12}" font-size="13" '
                     f'font-family="sans-serif">degree {dim} '
                     f'({len(bars)} intervals)</text>')
        yy = y + 24
        for iv in bars:
            bx = sx(iv.birth)
            if iv.finite:
                ex = sx(iv.death)
                parts.append(f'<line x1="{bx:.2f}" y1="{yy}" x2="{ex:.2f}" '
                             f'y2="{yy}" stroke="#1f6fb2" stroke-width="3"/>')
            else:
                parts.append(f'<line x1="{bx:.2f}" y1="{yy}" x2="{x1}" '
                             f'y2="{yy}" stroke="#b23a1f" stroke-width="3"/>')
                parts.append(f'<polygon points="{x1},{yy - 4} {x1 + 8},{yy} '
                             f'{x1},{yy + 4}" fill="#b23a1f"/>')
            yy += _ROW_H
        axis_y = yy + 4
        parts.append(f'<line x1="{x0}" y1="{axis_y}" x2="{x1}" y2="{axis_y}" '
                     f'stroke="#444" stroke-width="1"/>')
        for tv in (0.0, span / 2, span):
            tx = sx(tv)
            parts.append(f'<line x1="{tx:.2f}" y1="{axis_y}" x2="{tx:.2f}" '
                         f'y2="{axis_y + 4}" stroke="#444" stroke-width="1"/>')
            parts.append(f'<text x="{tx:.2f}" y="{axis_y + 16}" font-size="10" '
                         f'text-anchor="middle" font-family="sans-serif">'
                         f'{_fmt(tv)}</text>')
        y = axis_y + _PANEL_PAD
    height = y + 10
    body = "\n".join(parts)
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_W}" '
            f'height="{height}" viewBox="0 0 {_SVG_W} {height}">\n'
            f'{body}\n</svg>\n')


def _barcode_text(barcode: Barcode) -> str:
    lines = []
    for dim in range(barcode.max_dim + 1):
        bars = sorted(barcode.in_dim(dim),
                      key=lambda iv: (iv.birth, iv.death - iv.birth))
        lines.append(f"degree {dim}: {len(bars)} intervals "
                     f"(scale limit {_fmt(barcode.max_filtration)})")
        for iv in bars:
            death = _fmt(iv.death) if iv.finite else "inf"
            lines.append(f"  [{_fmt(iv.birth)}, {death})")
    return "\n".join(lines) + "\n"


def _scatter_svg(cloud: PointCloud) -> str:
    """First two coordinates (x, 0 for 1-D clouds), fit to a square canvas."""
    pts = cloud.points
    xy = np.zeros((len(cloud), 2))
    xy[:, 0] = pts[:, 0]
    if cloud.dim > 1:
        xy[:, 1] = pts[:, 1]
    lo = xy.min(axis=0)
    hi = xy.max(axis=0)
    span = float(max((hi - lo).max(), 1e-12))
    size, pad = 480, 24
    scale = (size - 2 * pad) / span
    parts = []
    for px, py in xy:
        cx = pad + (px - lo[0]) * scale
        cy = size - pad - (py - lo[1]) * scale  # y up
        parts.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="2" '
                     f'fill="#1f6fb2" fill-opacity="0.7"/>')
    body = "\n".join(parts)
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" '
            f'height="{size}" viewBox="0 0 {size} {size}">\n{body}\n</svg>\n')


# -- subcommand runners ------------------------------------------------------
#
# Each runner takes (params, out_dir) and returns the "computed" manifest
# section. from-manifest re-invokes the same runner with the stored params.

def _run_synth(params: dict, out: Path) -> dict:
    spec = NoisyShapeSpec(shape=params["shape"], noise_sigma=params["sigma"],
                          count=params["n"], seed=params["seed"],
                          box=params.get("box"), dim=params.get("dim", 2))
    cloud, rate = rejection_sample(spec)
    write_csv(cloud, out / "points.csv")
    _write_json({"shape": spec.shape, "noise_sigma": spec.noise_sigma,
                 "count": spec.count, "seed": spec.seed,
                 "box": spec.effective_box, "dim": spec.ambient_dim,
                 "acceptance_rate": rate},
                out / "points.json")
    return {"acceptance_rate": rate, "dim": spec.ambient_dim}


def _field_from_params(params: dict) -> tuple[FieldParams, bool]:
    omega = params.get("omega")
    defaulted = omega is None
    return FieldParams(sigma=params["sigma"],
                       omega=0.1 if defaulted else omega), defaulted


def _run_denoise(params: dict, out: Path) -> dict:
    data = read_csv(params["input"])
    field, omega_defaulted = _field_from_params(params)
    s0 = random_subset(data, params["subset"], params["seed"])
    dparams = DenoiseParams(field=field, step_c=params["c"],
                            iterations=params["iters"],
                            snapshot_every=params.get("snapshot_every", 0))
    trace = denoise_run(data, s0, dparams)
    for iteration, cloud in trace.snapshots:
        write_csv(cloud, out / f"s_{iteration}.csv")
    return {"m_norm": trace.m_norm,
            "omega_defaulted": omega_defaulted,
            "final_iteration": trace.snapshots[-1][0],
            "snapshots": [it for it, _ in trace.snapshots]}


def _run_threshold(params: dict, out: Path) -> dict:
    cloud = read_csv(params["input"])
    est = knn_density(cloud, params["k"])
    kept = threshold_top(cloud, est, params["fraction"])
    write_csv(kept, out / "points.csv")
    return {"kept": len(kept), "input_size": len(cloud)}


def _complex_from_params(cloud: PointCloud, params: dict):
    kind = params["complex"]
    cap = params.get("cap") or DEFAULT_SIMPLEX_CAP
    if kind == "rips":
        return rips_complex(cloud, params["max_eps"], params["max_dim"], cap=cap)
    if kind == "lazy-witness":
        landmarks = select_landmarks(cloud, params["landmarks"], params["seed"],
                                     params.get("landmark_method", "random"))
        return lazy_witness_complex(cloud, landmarks, params.get("nu", 1),
                                    params["max_eps"], params["max_dim"], cap=cap)
    raise ValidationError(f"unknown complex type {kind!r}")


def _run_barcode(params: dict, out: Path) -> dict:
    cloud = read_csv(params["input"])
    fc = _complex_from_params(cloud, params)
    barcode = persistence(fc)
    _write_barcode_files(barcode, out)
    return {"n_points": len(cloud),
            "simplices_by_dim": fc.counts_by_dim(),
            "n_intervals": len(barcode.intervals),
            "n_zero_length": barcode.n_zero_length}


def _run_compare(params: dict, out: Path) -> dict:
    data = read_csv(params["input"])

    field, omega_defaulted = _field_from_params(params)
    s0 = random_subset(data, params["subset"], params["seed"])
    dparams = DenoiseParams(field=field, step_c=params["c"],
                            iterations=params["iters"])
    trace = denoise_run(data, s0, dparams)
    write_csv(trace.final, out / "denoised.csv")

    est = knn_density(data, params["k"])
    kept = threshold_top(data, est, params["fraction"])
    write_csv(kept, out / "thresholded.csv")

    bc_den = persistence(_complex_from_params(trace.final, params))
    bc_thr = persistence(_complex_from_params(kept, params))
    stats_den = _write_barcode_files(bc_den, out, stem="barcode_denoise")
    stats_thr = _write_barcode_files(bc_thr, out, stem="barcode_threshold")

    dims = {}
    for d in range(params["max_dim"] + 1):
        sd, st = stats_den[str(d)], stats_thr[str(d)]
        pd_, pt = sd["prominence"], st["prominence"]
        if pd_ is None and pt is None:
            verdict = "none"
        elif pt is None or (pd_ is not None and _as_float(pd_) > _as_float(pt)):
            verdict = "denoise"
        elif pd_ is None or _as_float(pt) > _as_float(pd_):
            verdict = "threshold"
        else:
            verdict = "tie"
        dims[str(d)] = {"denoise": sd, "threshold": st, "verdict": verdict}
    report = {"dims": dims, "m_norm": trace.m_norm, "kept": len(kept)}
    _write_json(report, out / "report.json")
    return {"m_norm": trace.m_norm, "omega_defaulted": omega_defaulted,
            "kept": len(kept),
            "verdicts": {d: v["verdict"] for d, v in dims.items()}}


def _as_float(v) -> float:
    if v == "inf":
        return math.inf
    if v == "-inf":
        return -math.inf
    return float(v)


def _run_render_scatter(params: dict, out: Path) -> dict:
    cloud = read_csv(params["input"])
    (out / "scatter.svg").write_text(_scatter_svg(cloud), encoding="utf-8")
    return {"n_points": len(cloud)}


_RUNNERS = {
    "synth": _run_synth,
    "denoise": _run_denoise,
    "threshold": _run_threshold,
    "barcode": _run_barcode,
    "compare": _run_compare,
    "render-scatter": _run_render_scatter,
}


def _dispatch(subcommand: str, params: dict, out: Path, threads=None) -> Path:
    if threads:
        try:
            import numba
            numba.set_num_threads(max(1, min(threads, numba.config.NUMBA_NUM_THREADS)))
        except ImportError:
            pass
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    computed = _RUNNERS[subcommand](params, out)
    wall = time.perf_counter() - t0
    manifest = {
        "tool": "topodenoise",
        "version": __version__,
        "backend": _backend.get_backend(),
        "threads": threads,
        "subcommand": subcommand,
        "params": params,
        "computed": computed,
        "wall_time_s": wall,
    }
    _write_json(manifest, out / "run.json")
    return out


def run_from_manifest(manifest_path, out_dir, keep_backend: bool = False) -> Path:
    """Re-execute a recorded run into ``out_dir``.

    Outputs other than run.json (whose wall time necessarily differs) are
    byte-identical to the original run's.
    """
    with open(manifest_path, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    for key in ("subcommand", "params"):
        if key not in manifest:
            raise ValidationError(f"{manifest_path}: manifest missing {key!r}")
    if not keep_backend and manifest.get("backend"):
        _backend.set_backend(manifest["backend"])
    return _dispatch(manifest["subcommand"], manifest["params"],
                     Path(out_dir), manifest.get("threads"))


# -- argument parsing --------------------------------------------------------

def _add_barcode_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--complex", choices=["rips", "lazy-witness"], default="rips")
    p.add_argument("--max-dim", type=int, required=True)
    p.add_argument("--max-eps", type=float, required=True)
    p.add_argument("--landmarks", type=int, default=100,
                   help="landmark count for lazy-witness")
    p.add_argument("--nu", type=int, default=1, choices=[0, 1, 2])
    p.add_argument("--landmark-method", choices=["random", "maxmin"],
                   default="random")
    p.add_argument("--cap", type=int, default=None,
                   help=f"simplex cap (default {DEFAULT_SIMPLEX_CAP})")


def _add_denoise_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--subset", type=int, required=True,
                   help="size of the random initial subset")
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--omega", type=float, default=None,
                   help="repulsion weight (default 0.1, recorded as defaulted)")
    p.add_argument("--c", type=float, default=0.05, dest="c",
                   help="maximum translation per iteration")
    p.add_argument("--iters", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="topodenoise",
        description="Point-cloud de-noising with persistent-homology verification")
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("--threads", type=int, default=None,
                    help="cap worker threads (default: TOPODENOISE_THREADS or all)")
    sub = ap.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("synth", help="generate a noisy shape sample")
    p.add_argument("shape", choices=["circle", "sphere", "point"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--dim", type=int, default=2, help="ambient dim (point shape)")
    p.add_argument("--box", type=float, default=None,
                   help="proposal box half-width (default 1 + 5 sigma)")
    p.add_argument("--out", required=True)

    p = sub.add_parser("denoise", help="run the kernel-field de-noising flow")
    p.add_argument("--in", dest="input", required=True)
    _add_denoise_args(p)
    p.add_argument("--snapshot-every", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("threshold", help="kNN-density top-fraction baseline")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--fraction", type=float, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("barcode", help="persistence barcode of a point cloud")
    p.add_argument("--in", dest="input", required=True)
    _add_barcode_args(p)
    p.add_argument("--seed", type=int, default=0, help="landmark selection seed")
    p.add_argument("--out", required=True)

    p = sub.add_parser("compare",
                       help="de-noising vs thresholding, barcode verdict per degree")
    p.add_argument("--in", dest="input", required=True)
    _add_denoise_args(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--fraction", type=float, required=True)
    _add_barcode_args(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("render-scatter", help="2-D scatter SVG of a point cloud")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("from-manifest", help="re-run a recorded experiment")
    p.add_argument("manifest")
    p.add_argument("--out", required=True)
    p.add_argument("--keep-backend", action="store_true",
                   help="use the current backend instead of the recorded one")

    return ap


_PARAM_KEYS = {
    "synth": ["shape", "n", "sigma", "seed", "dim", "box"],
    "denoise": ["input", "subset", "sigma", "omega", "c", "iters", "seed",
                "snapshot_every"],
    "threshold": ["input", "k", "fraction"],
    "barcode": ["input", "complex", "max_dim", "max_eps", "landmarks", "nu",
                "landmark_method", "cap", "seed"],
    "compare": ["input", "subset", "sigma", "omega", "c", "iters", "seed",
                "k", "fraction", "complex", "max_dim", "max_eps", "landmarks",
                "nu", "landmark_method", "cap"],
    "render-scatter": ["input"],
}


def main(argv=None) -> int:
    import os
    args = build_parser().parse_args(argv)
    threads = args.threads
    if threads is None:
        env = os.environ.get("TOPODENOISE_THREADS")
        threads = int(env) if env else None
    try:
        if args.subcommand == "from-manifest":
            run_from_manifest(args.manifest, args.out,
                              keep_backend=args.keep_backend)
        else:
            params = {k: getattr(args, k) for k in _PARAM_KEYS[args.subcommand]}
            _dispatch(args.subcommand, params, Path(args.out), threads)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_VALIDATION
    except DegenerateFieldError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_DEGENERATE
    except ComplexSizeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_RESOURCE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_VALIDATION
    return 0


if __name__ == "__main__":
    sys.exit(main())
