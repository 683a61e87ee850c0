"""End-to-end approximation on a curved domain: partition, patch solves, assembly."""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .assembly import ErrorReport, PointCloud, assemble, error_report
from .geometry import GridSpec, ParametricCurve, point_in_domain
from .partition import PatchDatabase, ScanOptions, scan_partition
from .solvers import (
    FineGrid,
    Oracle,
    PatchOutput,
    PreparedPatch,
    SolverConfig,
    apply_prepared,
    prepare_patch,
)


@dataclass
class RunResult:
    db: PatchDatabase
    outputs: list[PatchOutput]
    cloud: PointCloud
    report: ErrorReport | None
    timings: dict[str, float] = field(default_factory=dict)


def background_lattice(grid: GridSpec, cfg: SolverConfig) -> FineGrid:
    """Lattice of the Rect sampling nodes: cell lines subdivided into ``m - 1`` steps."""
    mx, my = cfg.m
    return FineGrid((grid.box[0], grid.box[2]), (grid.hx / (mx - 1), grid.hy / (my - 1)))


def output_spacing(grid: GridSpec, cfg: SolverConfig) -> float:
    """Refined Rect output spacing, the quantum of point deduplication."""
    mx, my = cfg.m
    return min(grid.hx / (cfg.refine * (mx - 1)), grid.hy / (cfg.refine * (my - 1)))


def _map(fn, count: int, threads: int) -> list:
    if threads <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(count)))


def prepare_all(db: PatchDatabase, cfg: SolverConfig, threads: int = 1) -> list[PreparedPatch]:
    """Geometry-only preparation of every patch, in database order."""
    lattice = background_lattice(db.grid, cfg)
    # Build the shared operators before any worker touches them.
    cfg.warm()
    return _map(lambda i: prepare_patch(db[i], cfg, lattice, index=i), len(db), threads)


def apply_all(f: Oracle, prepared: list[PreparedPatch], cfg: SolverConfig,
              threads: int = 1) -> list[PatchOutput]:
    """Patch outputs for ``f``; the order follows ``prepared`` regardless of threading."""
    cfg.warm()
    return _map(lambda i: apply_prepared(f, prepared[i], cfg), len(prepared), threads)


def solve_all(f: Oracle, db: PatchDatabase, cfg: SolverConfig, threads: int = 1) -> list[PatchOutput]:
    """Prepare and solve every patch."""
    return apply_all(f, prepare_all(db, cfg, threads), cfg, threads)


def run_approximation(curve: ParametricCurve, grid: GridSpec, f: Oracle, cfg: SolverConfig,
                      opts: ScanOptions | None = None, threads: int = 1,
                      exact: Oracle | None = None) -> RunResult:
    """Partition the domain, solve every patch and assemble the global cloud.

    Errors are measured against ``exact``, which defaults to ``f``. The
    ``timings`` split the geometry-only build stage (partition and patch
    preparation) from the function-dependent solve and assembly.
    """
    timings = {}
    t0 = time.perf_counter()
    db = scan_partition(curve, grid, opts, cover=cfg.cover, cover_degree=cfg.cover_degree,
                        cover_delta0=cfg.cover_delta0)
    timings["partition"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    prepared = prepare_all(db, cfg, threads)
    timings["prepare"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    outputs = apply_all(f, prepared, cfg, threads)
    timings["solve"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    cloud = assemble(outputs, output_spacing(grid, cfg))
    timings["assemble"] = time.perf_counter() - t0
    report = error_report(cloud, exact or f, db.patches)
    timings["total"] = sum(timings.values())
    return RunResult(db, outputs, cloud, report, timings)


def inside_fraction(cloud: PointCloud, curve: ParametricCurve, tol: float = 0.0) -> float:
    """Share of cloud points inside the domain (a sanity check of the masks)."""
    if len(cloud) == 0:
        return 1.0
    return float(np.mean(point_in_domain(curve, cloud.points, tol=tol)))
