"""Command-line entry point: ``buckleopt {eig,optimize,verify,sweep}``.

Exit codes: 0 success, 2 usage or configuration error, 3 numerical failure
(``verify`` also returns 1 when a non-control check fails).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__, geometry
from .errors import InvalidDomainError, ResolutionTooCoarseError, SolverFailureError
from .operators import assemble_biharmonic, assemble_laplacian
from .raster import rasterize
from .shapeopt import OptimizerConfig, buckling_of_domain, optimize, trace_rows
from .verify import run_suite

log = logging.getLogger("buckleopt")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


def fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return "nan" if math.isnan(v) else f"{v:.17g}"
    return str(v)


def write_csv(path: Path, header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    path.write_text(buf.getvalue())


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


class RunManifest:
    """JSON record of one command run, written before work starts and finalized after."""

    def __init__(self, path: Path, command: str, config: dict, seed):
        self.path = path
        self.data = {
            "command": command,
            "config": config,
            "seed": seed,
            "version": __version__,
            "started": _now(),
            "finished": None,
            "status": "running",
            "outputs": [],
        }
        self._write()

    def _write(self):
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.write_text(json.dumps(self.data, indent=2, sort_keys=True) + "\n")

    def finalize(self, outputs, status="ok"):
        self.data["outputs"] = [str(p) for p in outputs]
        self.data["finished"] = _now()
        self.data["status"] = status
        self._write()


def _load_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from exc


def _seed_override(seed):
    env = os.environ.get("BUCKLEOPT_SEED")
    if env is None:
        return seed
    try:
        return int(env)
    except ValueError as exc:
        raise UsageError(f"BUCKLEOPT_SEED must be an integer, got {env!r}") from exc


# ---------------------------------------------------------------- commands

def cmd_eig(args) -> int:
    try:
        domain = geometry.domain_from_dict(_load_json(args.domain))
    except InvalidDomainError as exc:
        raise UsageError(str(exc)) from exc
    if args.h is not None and not args.h > 0:
        raise UsageError("--h must be positive")
    if args.count < 1:
        raise UsageError("--count must be at least 1")
    h = args.h if args.h is not None else geometry.diameter(domain) / 96
    out = Path(args.out) if args.out else None
    manifest = None
    if out is not None:
        config = {"domain": args.domain, "h": h, "count": args.count,
                  "extrapolate": args.extrapolate, "tol": args.tol}
        manifest = RunManifest(out.with_name(out.name + ".manifest.json"), "eig", config, None)
    rec = buckling_of_domain(domain, h, args.count, args.extrapolate, tol=args.tol)
    for i, lam in enumerate(rec.lambdas, start=1):
        print(f"lambda_{i} = {lam:.12g}")
    outputs = []
    if out is not None:
        out.write_text(json.dumps(rec.to_dict(), indent=2) + "\n")
        outputs.append(out)
    if args.dump_mask:
        g = rasterize(domain, h)
        text = g.to_pgm() if args.dump_mask.endswith(".pgm") else g.to_csv()
        Path(args.dump_mask).write_text(text)
        outputs.append(Path(args.dump_mask))
    if args.dump_matrix:
        g = rasterize(domain, h)
        base = Path(args.dump_matrix)
        for tag, op in (("A", assemble_biharmonic(g)), ("B", assemble_laplacian(g))):
            p = base.with_name(f"{base.stem}_{tag}{base.suffix or '.mtx'}")
            p.write_text(op.to_matrix_market())
            outputs.append(p)
    if manifest:
        manifest.finalize(outputs)
    return EXIT_OK


def cmd_optimize(args) -> int:
    raw = _load_json(args.config)
    try:
        raw = dict(raw)
        if "seed" in raw or os.environ.get("BUCKLEOPT_SEED") is not None:
            raw["seed"] = _seed_override(raw.get("seed", 0))
        config = OptimizerConfig.from_dict(raw)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid optimizer config: {exc}") from exc
    out_dir = Path(args.out_dir)
    manifest = RunManifest(out_dir / "manifest.json", "optimize", config.to_dict(), config.seed)
    trace = optimize(config)
    h = config.eigen_index
    header = ["eval_count", "objective", "perimeter"] + [f"lambda{i}" for i in range(1, h + 1)]
    header.append("hausdorff_to_disk")
    csv_path = out_dir / "trace.csv"
    write_csv(csv_path, header, trace_rows(trace))
    dom_path = out_dir / "final_domain.json"
    dom_path.write_text(geometry.dumps_domain(trace.final.domain) + "\n")
    summary_path = out_dir / "final_record.json"
    summary = {
        "final": trace.final.to_dict(),
        "initial": trace.initial.to_dict(),
        "converged": trace.converged,
        "evaluations": len(trace.evaluations),
        "hausdorff_to_disk": trace.hausdorff_to_disk,
    }
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    manifest.finalize([csv_path, dom_path, summary_path])
    print(f"objective {trace.final.objective_value:.10g}  "
          f"hausdorff_to_disk {trace.hausdorff_to_disk:.4g}  converged {trace.converged}")
    return EXIT_OK


def cmd_verify(args) -> int:
    seed = _seed_override(args.seed)
    out = Path(args.out) if args.out else None
    manifest = None
    if out is not None:
        manifest = RunManifest(out.with_name(out.name + ".manifest.json"), "verify",
                               {"seed": seed, "threads": args.threads}, seed)
    report = run_suite(seed, threads=args.threads)
    sys.stdout.write(report.to_table())
    if out is not None:
        out.write_text(report.to_json())
        manifest.finalize([out], "ok" if report.all_passed else "checks_failed")
    return EXIT_OK if report.all_passed else EXIT_FAIL


SWEEP_KEYS = {"family", "n_values", "perimeter", "radius", "saturate", "eigen_index", "grid_h",
              "resolution", "extrapolate", "out", "seed"}


def _sweep_config(raw: dict) -> dict:
    unknown = set(raw) - SWEEP_KEYS
    if unknown:
        raise UsageError(f"unknown sweep keys: {sorted(unknown)}")
    cfg = {"family": "regular_polygon", "n_values": [8, 16, 32, 64], "perimeter": 2 * math.pi,
           "radius": 1.0, "saturate": True, "eigen_index": 1, "grid_h": None,
           "resolution": 128, "extrapolate": True, "out": "sweep.csv", "seed": 0}
    cfg.update(raw)
    if cfg["family"] != "regular_polygon":
        raise UsageError("only the regular_polygon sweep family is supported")
    ns = cfg["n_values"]
    if not ns or any(not isinstance(n, int) or n < 3 for n in ns):
        raise UsageError("n_values must be integers >= 3")
    if not (cfg["perimeter"] > 0 and cfg["radius"] > 0 and cfg["eigen_index"] >= 1):
        raise UsageError("perimeter, radius and eigen_index must be positive")
    if cfg["grid_h"] is not None and not cfg["grid_h"] > 0:
        raise UsageError("grid_h must be positive")
    return cfg


def sweep_rows(cfg: dict) -> tuple:
    """Regular n-gons converging to a disk, with Hausdorff distance and eigenvalues.

    With ``saturate`` every n-gon is dilated to the sweep perimeter and the
    limit is the disk of that perimeter; otherwise n-gons are inscribed in
    the disk of the given radius.
    """
    from .shapeopt import disk_of_perimeter

    if cfg["saturate"]:
        limit = disk_of_perimeter(cfg["perimeter"])
    else:
        limit = geometry.Disk((0.0, 0.0), cfg["radius"])
    k = cfg["eigen_index"]
    header = ["n", "hausdorff_to_limit", "perimeter"] + [f"lambda{i}" for i in range(1, k + 1)]
    rows = []
    for n in cfg["n_values"]:
        poly = geometry.regular_polygon(n, limit.radius)
        if cfg["saturate"]:
            poly = geometry.saturate_perimeter(poly, cfg["perimeter"])
        h = cfg["grid_h"] or geometry.diameter(limit) / cfg["resolution"]
        rec = buckling_of_domain(poly, h, k, cfg["extrapolate"], seed=cfg["seed"])
        rows.append([n, geometry.hausdorff_distance(poly, limit), rec.perimeter, *rec.lambdas])
    return header, rows


def cmd_sweep(args) -> int:
    cfg = _sweep_config(_load_json(args.config))
    cfg["seed"] = _seed_override(cfg["seed"])
    out = Path(args.out or cfg["out"])
    manifest = RunManifest(out.with_name(out.name + ".manifest.json"), "sweep", cfg, cfg["seed"])
    header, rows = sweep_rows(cfg)
    write_csv(out, header, rows)
    manifest.finalize([out])
    for row in rows:
        print(" ".join(fmt(v) for v in row))
    return EXIT_OK


# -------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="buckleopt", description=__doc__.splitlines()[0])
    parser.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                        help="worker cap for independent computations")
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eig", help="buckling eigenvalues of one domain")
    p.add_argument("domain", help="domain JSON file")
    p.add_argument("--h", type=float, default=None, help="grid spacing (default diameter/96)")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--extrapolate", action="store_true", help="Richardson with h and h/2")
    p.add_argument("--tol", type=float, default=1e-8, help="eigen residual tolerance")
    p.add_argument("--out", help="ObjectiveRecord JSON output")
    p.add_argument("--dump-mask", help="write the interior mask (.pgm or .csv)")
    p.add_argument("--dump-matrix", help="write A and B in Matrix Market form")
    p.set_defaults(func=cmd_eig)

    p = sub.add_parser("optimize", help="perimeter-constrained shape search")
    p.add_argument("config", help="OptimizerConfig JSON file")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("verify", help="run the property-check suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="report JSON output")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="regular n-gon family converging to the disk")
    p.add_argument("config", help="sweep config JSON file")
    p.add_argument("--out", help="CSV output (overrides config)")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        parser.error("--threads must be at least 1")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"buckleopt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SolverFailureError, ResolutionTooCoarseError) as exc:
        print(f"buckleopt: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except InvalidDomainError as exc:
        print(f"buckleopt: invalid domain: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
