"""Command-line interface: ``grassmann-pssvr {synth,cluster,sweep,eval}``.

Exit codes: 0 success (non-convergence included), 2 usage error,
3 data error, 4 numerical error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import itertools
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .data_io import (
    SynthesisSpec,
    load_dataset,
    load_frame_manifest,
    load_labels,
    save_dataset,
    save_labels,
    save_matrix,
    synth,
)
from .errors import DataFormatError, DimensionError, NumericalError, ParameterError, RankDeficiencyError
from .graph import Kernel, build_laplacian
from .grassmann import delta_matrix
from .pipeline import run_pipeline
from .solver import SolverConfig
from .spectral import accuracy

log = logging.getLogger("grassmann_pssvr")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4
THREADS_ENV = "GRASSMANN_PSSVR_THREADS"
DEFAULT_MAX_CELLS = 10_000


class UsageError(Exception):
    pass


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _hash_inputs(path: Path) -> dict:
    files = sorted(p for p in path.rglob("*") if p.is_file()) if path.is_dir() else [path]
    return {str(f): sha256_file(f) for f in files}


def write_manifest(outdir: Path, command: str, config: dict, inputs: dict, outputs, timings: dict):
    manifest = {
        "command": command,
        "version": __version__,
        "config": config,
        "inputs": inputs,
        "outputs": {str(Path(p).name): sha256_file(p) for p in outputs},
        "timings_s": timings,
    }
    path = outdir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def residual_svg(residuals, width=480, height=240) -> str:
    """Static line chart of log10 residual per iteration."""
    pad = 30
    vals = np.log10(np.maximum(np.asarray(residuals, dtype=float), 1e-300))
    lo, hi = (float(vals.min()), float(vals.max())) if vals.size else (0.0, 1.0)
    if hi == lo:
        hi = lo + 1.0
    n = max(len(vals) - 1, 1)
    pts = " ".join(
        f"{pad + (width - 2 * pad) * i / n:.2f},{height - pad - (height - 2 * pad) * (v - lo) / (hi - lo):.2f}"
        for i, v in enumerate(vals)
    )
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">\n'
        f'<rect width="{width}" height="{height}" fill="white"/>\n'
        f'<polyline fill="none" stroke="black" stroke-width="1.5" points="{pts}"/>\n'
        f'<text x="{pad}" y="{pad - 10}" font-size="11">log10 ||Z-J||_inf: {hi:.1f} .. {lo:.1f}</text>\n'
        f'<text x="{width - pad}" y="{height - 8}" font-size="11" text-anchor="end">iteration {len(vals)}</text>\n'
        "</svg>\n"
    )


def _solver_config(args, **overrides) -> SolverConfig:
    values = dict(
        lam=args.lam,
        beta=args.beta,
        expected_rank=args.rank,
        mu_init=args.mu_init,
        mu_max=args.mu_max,
        rho=args.rho,
        epsilon=args.epsilon,
        max_iter=args.max_iter,
        partial_svd=args.partial_svd,
        seed=args.seed,
    )
    values.update(overrides)
    return SolverConfig(**values)


def _load_points(args):
    path = Path(args.dataset)
    if not path.exists():
        raise DataFormatError(f"dataset {path} does not exist")
    if path.suffix == ".jsonl":
        if args.frames_p is None:
            raise UsageError("a frame manifest needs --frames-p")
        ds = load_frame_manifest(path, args.frames_p)
    else:
        ds = load_dataset(path)
    truth = ds.labels
    if getattr(args, "truth", None):
        truth = load_labels(args.truth)
        if truth.size != len(ds):
            raise DataFormatError(f"{truth.size} truth labels for {len(ds)} points")
    return ds, truth


# --- commands -----------------------------------------------------------


def cmd_synth(args) -> int:
    spec = SynthesisSpec(
        clusters=args.clusters,
        per_cluster=args.per_cluster,
        ambient_dim=args.d,
        subspace_dim=args.p,
        noise_sigma=args.sigma,
        seed=args.seed,
        orthogonal_prototypes=args.orthogonal,
    )
    outdir = Path(args.output)
    t0 = time.perf_counter()
    ds = synth(spec)
    written = save_dataset(outdir, ds)
    config = {k: v for k, v in vars(args).items() if k not in ("func", "output", "verbose")}
    write_manifest(outdir, "synth", config, {}, written, {"synth": time.perf_counter() - t0})
    print(f"wrote {len(ds)} points ({spec.clusters} clusters) to {outdir}")
    return EXIT_OK


def cmd_cluster(args) -> int:
    if args.beta > 0 and args.neighbors is None:
        raise UsageError("--beta > 0 requires --neighbors")
    config = _solver_config(args)
    kernel = Kernel.parse(args.kernel)
    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)

    t0 = time.perf_counter()
    ds, truth = _load_points(args)
    load_time = time.perf_counter() - t0
    if not 1 <= args.k <= len(ds):
        raise UsageError(f"--k must lie in [1, {len(ds)}]")

    result = run_pipeline(ds.points, args.k, config, args.neighbors, kernel, truth, variant=args.variant)
    timings = {"represent": load_time, **result.timings}

    state, report = result.state, result.report
    labels_path = outdir / "labels.txt"
    save_labels(labels_path, result.labels)
    diag_path = outdir / "diagnostics.csv"
    with diag_path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["iteration", "residual_inf", "objective", "mu"])
        for it, res, obj, mu in state.records():
            writer.writerow([it, f"{res:.17g}", f"{obj:.17g}", f"{mu:.17g}"])
    z_path = save_matrix(outdir / "z.gmx", state.z)
    report_path = outdir / "report.json"
    summary = {
        "converged": state.converged,
        "iterations": state.iteration,
        "m": len(ds),
        "k": args.k,
        "kmeans_seed": result.clustering.seed,
        "accuracy": result.accuracy,
        "kkt": report.as_dict(),
    }
    report_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    outputs = [labels_path, diag_path, z_path, report_path]
    if args.svg:
        svg_path = outdir / "residuals.svg"
        svg_path.write_text(residual_svg(state.residual_history))
        outputs.append(svg_path)

    config_snapshot = {
        "solver": {
            "lambda": config.lam,
            "beta": config.beta,
            "expected_rank": config.expected_rank,
            "mu_init": config.mu_init,
            "mu_max": config.mu_max,
            "rho": config.rho,
            "epsilon": config.epsilon,
            "max_iter": config.max_iter,
            "partial_svd": config.partial_svd,
            "seed": config.seed,
        },
        "graph": {"neighbors": args.neighbors, "kernel": args.kernel},
        "spectral": {"k": args.k, "variant": args.variant},
        "dataset": str(args.dataset),
    }
    write_manifest(outdir, "cluster", config_snapshot, _hash_inputs(Path(args.dataset)), outputs, timings)

    print(f"iterations {state.iteration}  converged={str(state.converged).lower()}  "
          f"residual {report.primal_residual:.3e}")
    if result.accuracy is not None:
        print(f"accuracy {result.accuracy:.4f}")
    return EXIT_OK


def _parse_grid(text, cast):
    """``"1,2,5"`` or an integer range ``"0:5"`` (inclusive)."""
    if cast is int and ":" in text:
        lo, hi = (int(t) for t in text.split(":"))
        return list(range(lo, hi + 1))
    return [cast(t) for t in text.split(",") if t.strip()]


def _sweep_cell(task):
    points, truth, k, config, neighbors, kernel, variant, delta = task
    t0 = time.perf_counter()
    res = run_pipeline(points, k, config, neighbors, kernel, truth, delta=delta, variant=variant)
    return res.accuracy, res.state.iteration, res.state.converged, time.perf_counter() - t0


def cmd_sweep(args) -> int:
    lams = _parse_grid(args.lam, float)
    betas = _parse_grid(args.beta, float)
    ranks = _parse_grid(args.rank, int)
    neighbors = _parse_grid(args.neighbors, int) if args.neighbors else [None]
    cells = list(itertools.product(lams, betas, ranks, neighbors, range(args.repeat)))
    if len(cells) > args.max_cells:
        raise UsageError(f"grid has {len(cells)} cells, more than --max-cells {args.max_cells}")
    if any(b > 0 for b in betas) and neighbors == [None]:
        raise UsageError("--beta > 0 requires --neighbors")
    ds, truth = _load_points(args)
    kernel = Kernel.parse(args.kernel)
    delta = delta_matrix(ds.points)

    tasks = []
    for lam, beta, rank, c, _ in cells:
        config = _solver_config(args, lam=lam, beta=beta, expected_rank=rank)
        tasks.append((ds.points, truth, args.k, config, c, kernel, args.variant, delta))
    workers = args.workers or int(os.environ.get(THREADS_ENV, "1"))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_cell, tasks))  # map preserves grid order
    else:
        results = [_sweep_cell(t) for t in tasks]

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["lambda", "beta", "rank", "neighbors", "repeat", "accuracy", "iterations", "converged", "runtime_s"])
    for (lam, beta, rank, c, rep), (acc, iters, conv, secs) in zip(cells, results):
        writer.writerow([
            lam, beta, rank, "" if c is None else c, rep,
            "" if acc is None else f"{acc:.4f}", iters, str(conv).lower(), f"{secs:.4f}",
        ])
    if args.output == "-":
        sys.stdout.write(buf.getvalue())
    else:
        Path(args.output).write_text(buf.getvalue())
        print(f"wrote {len(cells)} rows to {args.output}")
    return EXIT_OK


def cmd_eval(args) -> int:
    pred = load_labels(args.predicted)
    truth = load_labels(args.truth)
    if pred.size != truth.size:
        raise DimensionError(f"{pred.size} predicted labels vs {truth.size} true labels")
    acc = accuracy(pred, truth)
    print(f"{acc:.4f}")
    if args.json:
        Path(args.json).write_text(json.dumps({"accuracy": acc, "n": int(pred.size)}, indent=2) + "\n")
    return EXIT_OK


# --- parser -------------------------------------------------------------


def _add_solver_flags(p, grid=False):
    if grid:
        p.add_argument("--lambda", dest="lam", default="1", help="comma list of lambda values")
        p.add_argument("--beta", default="0", help="comma list of beta values")
        p.add_argument("--rank", default="0", help="comma list or inclusive range a:b of expected ranks")
        p.add_argument("--neighbors", default=None, help="comma list of neighborhood sizes C")
    else:
        p.add_argument("--lambda", dest="lam", type=float, default=1.0,
                       help="reconstruction weight (typically 0.01 to 20)")
        p.add_argument("--beta", type=float, default=0.0,
                       help="Laplacian weight, 0 for plain GPSSVR (typically 1e-4 to 1e-2)")
        p.add_argument("--rank", type=int, default=0, help="expected rank r")
        p.add_argument("--neighbors", type=int, default=None, help="neighborhood size C")
    p.add_argument("--kernel", default="distance", help="distance | heat:SIGMA")
    p.add_argument("--k", type=int, required=True, help="number of clusters")
    p.add_argument("--mu-init", type=float, default=1e-6)
    p.add_argument("--mu-max", type=float, default=1e10)
    p.add_argument("--rho", type=float, default=1.9)
    p.add_argument("--epsilon", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--partial-svd", action="store_true")
    p.add_argument("--variant", choices=("sym", "rw"), default="sym", help="spectral embedding variant")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--frames-p", type=int, default=None, help="subspace dimension for .jsonl frame manifests")
    p.add_argument("--truth", default=None, help="ground-truth labels file (overrides dataset labels)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="grassmann-pssvr", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic labeled Grassmann dataset")
    p.add_argument("--clusters", type=int, required=True)
    p.add_argument("--per-cluster", type=int, required=True)
    p.add_argument("--d", type=int, required=True, help="ambient dimension")
    p.add_argument("--p", type=int, required=True, help="subspace dimension")
    p.add_argument("--sigma", type=float, default=0.0, help="noise level")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--orthogonal", action="store_true", help="mutually orthogonal prototypes")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("cluster", help="run the full clustering pipeline on a dataset")
    p.add_argument("dataset", help="dataset directory or .jsonl frame manifest")
    _add_solver_flags(p)
    p.add_argument("--svg", action="store_true", help="also write residuals.svg")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("sweep", help="grid sweep over lambda / beta / rank / C")
    p.add_argument("dataset")
    _add_solver_flags(p, grid=True)
    p.add_argument("--repeat", type=int, default=1)
    p.add_argument("--max-cells", type=int, default=DEFAULT_MAX_CELLS)
    p.add_argument("--workers", type=int, default=None, help=f"worker processes (default ${THREADS_ENV} or 1)")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("eval", help="clustering accuracy of predicted vs true labels")
    p.add_argument("predicted")
    p.add_argument("truth")
    p.add_argument("--json", default=None)
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataFormatError, DimensionError, RankDeficiencyError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical error in {args.command}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
