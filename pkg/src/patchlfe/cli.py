"""Command-line front end: ``patchlfe {partition,approx,calibrate,bench}``.

Settings come from built-in defaults, then an optional ``key = value``
config file, then command-line flags, each overriding the previous one.
Every output directory receives a ``summary.txt`` that starts with the
effective configuration.

Exit codes: 0 success, 1 invalid usage or configuration, 2 partition
failure, 3 numeric failure, 4 file I/O failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path


from . import __version__
from .assembly import pointwise_errors
from .calibration import (
    CAL_EPS_REL,
    CAL_OMEGA,
    CAL_OMEGA_Y,
    CAL_TARGET,
    TABLE1_GAMMAS,
    TABLE2_TS,
    CalibrationError,
    bench_scaling,
    sweep_N,
    sweep_T,
    table_csv,
    table_nthreshold,
    table_tmin,
    timing_csv,
)
from .fe1d import Fe1dParams, stability_estimate
from .functions import get_function
from .geometry import GridSpec, builtin_curve, domain_box, load_curve
from .linalg import DegenerateSystemError
from .output import cloud_csv, error_heatmap, patch_map, pgm_text, type_table, write_text
from .partition import PartitionError, coverage_gaps, scan_partition
from .pipeline import run_approximation
from .solvers import NumericFailure, SolverConfig

log = logging.getLogger("patchlfe")

EXIT_OK, EXIT_USAGE, EXIT_PARTITION, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3, 4

COMMANDS = ("partition", "approx", "calibrate", "bench")


class UsageError(ValueError):
    """Invalid flag or configuration value."""


@dataclass
class RunConfig:
    """Effective settings of one CLI run (defaults follow the standard parameter set)."""

    command: str = "approx"
    curve: str = "smooth"
    K: int = 20
    T: float = 4.0
    gamma: float = 1.2
    n: int = 10
    refine: int = 5
    eps_rel: float = 1e-12
    cover: str = "off"
    cover_degree: int = 3
    cover_delta0: float | None = None
    func: str = "sinxy"
    out: str = "."
    threads: int = 0
    seed: int = 0
    sampling: str = "grid"
    cloud: str = "on"
    sweeps: str = "off"
    bench_K: str = "10,20,40"
    repeats: int = 3

    def solver_config(self) -> SolverConfig:
        fe = Fe1dParams(T=self.T, N=self.n, gamma=self.gamma, eps_rel=self.eps_rel)
        return SolverConfig(fe_x=fe, fe_y=fe, refine=self.refine, sampling=self.sampling,
                            cover=self.cover == "on", cover_degree=self.cover_degree,
                            cover_delta0=self.cover_delta0)

    def echo(self) -> str:
        lines = ["[config]"]
        for f in fields(self):
            v = getattr(self, f.name)
            lines.append(f"{f.name} = {'default' if v is None else v}")
        return "\n".join(lines) + "\n"


_TYPES = {f.name: f.type for f in fields(RunConfig)}
_CHOICES = {"cover": ("on", "off"), "cloud": ("on", "off"), "sweeps": ("on", "off"),
            "sampling": ("grid", "uniform")}


def _convert(key: str, raw: str):
    kind = _TYPES[key]
    try:
        if kind == "int":
            value = int(raw)
        elif kind == "float":
            value = float(raw)
        elif kind == "float | None":
            value = None if raw.strip().lower() in ("", "default", "none") else float(raw)
        else:
            value = raw.strip()
    except ValueError:
        raise UsageError(f"invalid value {raw!r} for {key}") from None
    if key in _CHOICES and value not in _CHOICES[key]:
        raise UsageError(f"{key} must be one of {_CHOICES[key]}, got {value!r}")
    return value


def read_config(path: Path) -> dict:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, raw = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _TYPES or key == "command":
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = _convert(key, raw)
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("run settings")
    g.add_argument("--curve", help="smooth, rough or file:PATH with t,x,y rows")
    g.add_argument("--K", type=str, help="background cells per direction")
    g.add_argument("--T", type=str, help="extension parameter")
    g.add_argument("--gamma", type=str, help="oversampling ratio")
    g.add_argument("--n", type=str, help="Fourier order N")
    g.add_argument("--refine", type=str, help="output refinement factor r")
    g.add_argument("--eps-rel", dest="eps_rel", type=str, help="relative TSVD threshold")
    g.add_argument("--cover", choices=("on", "off"), help="smooth covers for boundary patches")
    g.add_argument("--cover-degree", dest="cover_degree", type=str, help="cover polynomial degree")
    g.add_argument("--cover-delta0", dest="cover_delta0", type=str,
                   help="cover clearance (default: 1e-3 of the box diagonal)")
    g.add_argument("--func", help="sinxy, u1, u2, f1..f4 or sepexp(wx,wy)")
    g.add_argument("--out", help="output directory")
    g.add_argument("--threads", type=str, help="worker threads for patch work (0: all cores)")
    g.add_argument("--config", type=Path, help="key = value settings file")
    g.add_argument("--seed", type=str, help="seed of the randomized kernel check")
    g.add_argument("--sampling", choices=("grid", "uniform"), help="curved-column source nodes")
    g.add_argument("--cloud", choices=("on", "off"), help="write the cloud CSV (approx)")
    g.add_argument("--sweeps", choices=("on", "off"), help="write full sweep grids (calibrate)")
    g.add_argument("--bench-K", dest="bench_K", help="comma-separated K list (bench)")
    g.add_argument("--repeats", type=str, help="timing repeats (bench)")

    parser = _Parser(prog="patchlfe", description="Patchwise Fourier extension on curved 2-D domains.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("partition", parents=[common], help="partition the domain into patches")
    sub.add_parser("approx", parents=[common], help="approximate a function on the domain")
    sub.add_parser("calibrate", parents=[common], help="rect-patch parameter calibration tables")
    sub.add_parser("bench", parents=[common], help="scaling benchmark of the solve stage")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then the config file, then explicit flags."""
    values = {}
    if args.config is not None:
        values.update(read_config(args.config))
    for key in _TYPES:
        raw = getattr(args, key, None)
        if raw is not None and key != "command":
            values[key] = _convert(key, raw) if isinstance(raw, str) else raw
    cfg = RunConfig(command=args.command, **values)
    if cfg.threads <= 0:
        cfg.threads = os.cpu_count() or 1
    if cfg.K < 2:
        raise UsageError("K must be at least 2")
    return cfg


def load_domain(spec: str):
    if spec in ("smooth", "smooth-blob"):
        return builtin_curve("smooth-blob")
    if spec in ("rough", "rough-blob"):
        return builtin_curve("rough-blob")
    if spec.startswith("file:"):
        return load_curve(spec[5:])
    raise UsageError(f"unknown curve {spec!r}; use smooth, rough or file:PATH")


# Commands ------------------------------------------------------------------------

def _grid(cfg: RunConfig, curve) -> GridSpec:
    return GridSpec.square(cfg.K, domain_box(curve))


def cmd_partition(cfg: RunConfig, out: Path) -> dict:
    curve = load_domain(cfg.curve)
    grid = _grid(cfg, curve)
    sc = cfg.solver_config()
    db = scan_partition(curve, grid, cover=sc.cover, cover_degree=sc.cover_degree,
                        cover_delta0=sc.cover_delta0)
    gaps = coverage_gaps(db)
    if gaps.size:
        raise PartitionError(f"{len(gaps)} inside points are not covered by any patch "
                             f"(first at {gaps[0][0]:.6f}, {gaps[0][1]:.6f}); increase K")
    write_text(out / "partition.csv", db.to_csv())
    write_text(out / "patch_map.pgm", pgm_text(patch_map(db)))
    counts = db.counts()
    lines = [f"{k} = {v}" for k, v in counts.items()]
    write_text(out / "summary.txt", cfg.echo() + "[partition]\n" + "\n".join(lines) + "\n")
    return counts


def cmd_approx(cfg: RunConfig, out: Path) -> dict:
    curve = load_domain(cfg.curve)
    f = get_function(cfg.func)
    grid = _grid(cfg, curve)
    sc = cfg.solver_config()
    run = run_approximation(curve, grid, f, sc, threads=cfg.threads)
    errors = pointwise_errors(run.cloud, f)
    kernel = stability_estimate(sc.op_x, seed=cfg.seed)
    build = run.timings["partition"] + run.timings["prepare"]
    log.info("build %.3f s, solve %.3f s", build, run.timings["solve"])

    text = cfg.echo() + "[results]\n"
    text += "\n".join(run.report.summary_lines()) + "\n"
    text += f"patches = {len(run.db)}\nkernel_stability = {kernel:.6e}\n"
    text += "[per_type]\n" + type_table(cfg.K, len(run.db), run.report)
    write_text(out / "summary.txt", text)
    write_text(out / "error_heatmap.pgm", pgm_text(error_heatmap(run.cloud, errors, grid.box)))
    if cfg.cloud == "on":
        cloud_csv(out / "cloud.csv", run.cloud, errors)
    return {"global_max_error": run.report.global_max, "patches": len(run.db),
            "points": len(run.cloud), "build_s": build, "solve_s": run.timings["solve"]}


def cmd_calibrate(cfg: RunConfig, out: Path) -> dict:
    kw = dict(omega=CAL_OMEGA, omega_y=CAL_OMEGA_Y, eps_rel=CAL_EPS_REL)
    tmin = table_tmin(threads=cfg.threads, target_err=CAL_TARGET, **kw)
    nthr = table_nthreshold(threads=cfg.threads, target_err=CAL_TARGET, **kw)
    write_text(out / "table_tmin.csv", table_csv(("gamma", "T_min"), tmin))
    write_text(out / "table_nthreshold.csv", table_csv(("T", "N_threshold"), nthr))
    if cfg.sweeps == "on":
        parts = [sweep_T(g, 60, threads=cfg.threads, target=CAL_TARGET, **kw).to_csv()
                 for g in TABLE1_GAMMAS]
        write_text(out / "sweep_T.csv", parts[0] + "".join(p.split("\n", 1)[1] for p in parts[1:]))
        parts = [sweep_N(T, 4.0, threads=cfg.threads, target=CAL_TARGET, **kw).to_csv()
                 for T in TABLE2_TS]
        write_text(out / "sweep_N.csv", parts[0] + "".join(p.split("\n", 1)[1] for p in parts[1:]))
    text = cfg.echo() + "[calibration]\n"
    text += (f"omega_x = {CAL_OMEGA}\nomega_y = {CAL_OMEGA_Y:.17g}\ntarget = {CAL_TARGET:g}\n"
             f"eps_rel = {CAL_EPS_REL:g}\n")
    text += "".join(f"T_min[gamma={g:g}] = {v:g}\n" for g, v in tmin.items())
    text += "".join(f"N_threshold[T={T:g}] = {v}\n" for T, v in nthr.items())
    write_text(out / "summary.txt", text)
    return {"tmin": tmin, "nthreshold": nthr}


def cmd_bench(cfg: RunConfig, out: Path) -> dict:
    try:
        Ks = [int(k) for k in cfg.bench_K.split(",") if k.strip()]
    except ValueError:
        raise UsageError(f"bench K list must be comma-separated integers, got {cfg.bench_K!r}") from None
    curve = load_domain(cfg.curve)
    # Timing runs are sequential and exclusive: no worker threads.
    records, stat = bench_scaling(curve, Ks, cfg.solver_config(), repeats=cfg.repeats,
                                  f=get_function(cfg.func))
    write_text(out / "timing.csv", timing_csv(records))
    text = cfg.echo() + "[bench]\n" + f"linearity = {stat:.4f}\n"
    write_text(out / "summary.txt", text)
    return {"records": records, "linearity": stat}


HANDLERS = {"partition": cmd_partition, "approx": cmd_approx,
            "calibrate": cmd_calibrate, "bench": cmd_bench}


def run_experiment(cfg: RunConfig) -> dict:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return HANDLERS[cfg.command](cfg, out)


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        result = run_experiment(cfg)
    except UsageError as exc:
        print(f"patchlfe: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PartitionError as exc:
        print(f"patchlfe: partition failed: {exc}", file=sys.stderr)
        return EXIT_PARTITION
    except (NumericFailure, DegenerateSystemError, CalibrationError) as exc:
        print(f"patchlfe: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"patchlfe: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"patchlfe: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for key, value in result.items():
        if isinstance(value, float):
            print(f"{key} = {value:.6e}")
        elif key != "records":
            print(f"{key} = {value}")
    if "records" in result:
        print(timing_csv(result["records"]), end="")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
