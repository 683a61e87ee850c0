"""Parameter calibration sweeps on a rectangular patch and the scaling benchmark.

The calibration function is the separable plane wave
``F(x, y) = exp(i omega_x x) exp(i omega_y y)`` on the unit square. The
transverse direction uses a deliberately over-resolved extension so that
the measured error isolates the ``x`` parameters under test.
"""

from __future__ import annotations

import csv
import io
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .fe1d import Fe1dParams
from .functions import sepexp
from .geometry import GridSpec, ParametricCurve, domain_box
from .partition import ScanOptions, scan_partition
from .patches import PatchRecord, PatchType
from .assembly import assemble
from .pipeline import apply_all, output_spacing, prepare_all
from .solvers import SolverConfig, solve_rect

# Calibration defaults. ``CAL_OMEGA`` is the phase advance across the unit
# patch; together with the 1e-13 target and the 1e-14 truncation it places
# the detected thresholds where the admissible-range transition is sharp.
CAL_OMEGA = 3.5
CAL_OMEGA_Y = 2 * np.pi
CAL_TARGET = 1e-13
CAL_EPS_REL = 1e-14
CAL_TRANSVERSE = Fe1dParams(T=3.0, N=30, gamma=4.0, eps_rel=1e-14)
T_START = 1.05
T_STOP = 8.0
N_STOP = 80
HYSTERESIS = 3

UNIT_PATCH = PatchRecord(PatchType.RECT, (0.0, 1.0), extent=(0.0, 1.0))


class CalibrationError(RuntimeError):
    """No admissible parameter was found in the scanned range."""


@dataclass
class SweepResult:
    """Errors along one scanned parameter and the detected threshold (``None`` if absent)."""

    parameter: str
    values: np.ndarray
    errors: np.ndarray
    fixed: dict
    detected: float | None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        keys = sorted(self.fixed)
        w.writerow(keys + [self.parameter, "max_error"])
        for v, e in zip(self.values, self.errors):
            w.writerow([_fmt(self.fixed[k]) for k in keys] + [_fmt(v), f"{e:.17g}"])
        return buf.getvalue()


def _fmt(v) -> str:
    return f"{v:.17g}" if isinstance(v, float) else str(v)


def rect_error(T: float, N: int, gamma: float, omega: float = CAL_OMEGA,
               omega_y: float = CAL_OMEGA_Y, eps_rel: float = CAL_EPS_REL,
               transverse: Fe1dParams = CAL_TRANSVERSE, refine: int = 5) -> float:
    """Max error of the rect-patch solver on the calibration function."""
    cfg = SolverConfig(fe_x=Fe1dParams(T=T, N=N, gamma=gamma, eps_rel=eps_rel),
                       fe_y=transverse, refine=refine)
    f = sepexp(omega, omega_y)
    out = solve_rect(f, UNIT_PATCH, cfg)
    exact = f(out.points[:, 0], out.points[:, 1])
    return float(np.max(np.abs(out.values - exact)))


def _first_stable(errors, target: float, run: int = HYSTERESIS) -> int | None:
    ok = np.asarray(errors) < target
    for k in range(len(ok) - run + 1):
        if ok[k:k + run].all():
            return k
    return None


def _map(fn, items, threads: int):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def t_values(step: float = 0.05, start: float = T_START, stop: float = T_STOP) -> np.ndarray:
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(count), 10)


def sweep_T(gamma: float, N: int, Ts=None, omega: float = CAL_OMEGA, omega_y: float = CAL_OMEGA_Y,
            target: float = CAL_TARGET, eps_rel: float = CAL_EPS_REL, threads: int = 1) -> SweepResult:
    """Errors over a range of ``T``; the detection is the first of three consecutive passes."""
    Ts = t_values() if Ts is None else np.asarray(Ts, dtype=float)
    errs = np.array(_map(lambda T: rect_error(T, N, gamma, omega, omega_y, eps_rel), Ts, threads))
    k = _first_stable(errs, target)
    return SweepResult("T", Ts, errs, {"gamma": float(gamma), "N": int(N), "omega": float(omega)},
                       None if k is None else float(Ts[k]))


def sweep_N(T: float, gamma: float, Ns=None, omega: float = CAL_OMEGA, omega_y: float = CAL_OMEGA_Y,
            target: float = CAL_TARGET, eps_rel: float = CAL_EPS_REL, threads: int = 1) -> SweepResult:
    """Errors over a range of ``N``; the detection is the first ``N`` with ``N + 1`` also passing."""
    Ns = np.arange(3, N_STOP + 1) if Ns is None else np.asarray(Ns, dtype=int)
    errs = np.array(_map(lambda N: rect_error(T, int(N), gamma, omega, omega_y, eps_rel), Ns, threads))
    k = _first_stable(errs, target, run=2)
    return SweepResult("N", Ns, errs, {"T": float(T), "gamma": float(gamma), "omega": float(omega)},
                       None if k is None else float(Ns[k]))


def find_Tmin(gamma: float, N: int = 60, omega: float = CAL_OMEGA, target_err: float = CAL_TARGET,
              step: float = 0.05, omega_y: float = CAL_OMEGA_Y, eps_rel: float = CAL_EPS_REL) -> float:
    """Smallest scanned ``T`` whose error and the next two errors are below ``target_err``.

    The scan ascends from 1.05 and stops as soon as the detection is settled.
    """
    if not 0 < step <= 0.1:
        raise ValueError("step must lie in (0, 0.1]")
    run = 0
    for T in t_values(step):
        if rect_error(T, N, gamma, omega, omega_y, eps_rel) < target_err:
            run += 1
            if run == HYSTERESIS:
                return float(np.round(T - (HYSTERESIS - 1) * step, 10))
        else:
            run = 0
    raise CalibrationError(f"no admissible T in (1, {T_STOP}] for gamma={gamma}, N={N}")


def find_Nthreshold(T: float, gamma: float = 4.0, omega: float = CAL_OMEGA,
                    target_err: float = CAL_TARGET, omega_y: float = CAL_OMEGA_Y,
                    eps_rel: float = CAL_EPS_REL, n_max: int = N_STOP) -> int:
    """Smallest ``N`` reaching ``target_err`` with ``N + 1`` reaching it too."""
    prev = False
    for N in range(3, n_max + 1):
        ok = rect_error(T, N, gamma, omega, omega_y, eps_rel) < target_err
        if ok and prev:
            return N - 1
        prev = ok
    raise CalibrationError(f"target {target_err:g} not reached by N={n_max} at T={T}, gamma={gamma}")


TABLE1_GAMMAS = (1.0, 1.2, 1.5, 2.0, 4.0)
TABLE2_TS = (1.2, 1.5, 2.0, 3.0, 4.0, 6.0)


def table_tmin(gammas=TABLE1_GAMMAS, N: int = 60, threads: int = 1, **kw) -> dict[float, float]:
    return dict(zip(gammas, _map(lambda g: find_Tmin(g, N, **kw), gammas, threads)))


def table_nthreshold(Ts=TABLE2_TS, gamma: float = 4.0, threads: int = 1, **kw) -> dict[float, int]:
    return dict(zip(Ts, _map(lambda T: find_Nthreshold(T, gamma, **kw), Ts, threads)))


def table_csv(header: tuple[str, str], rows: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for k, v in rows.items():
        w.writerow([_fmt(float(k)), _fmt(v)])
    return buf.getvalue()


# Scaling benchmark ---------------------------------------------------------------

@dataclass
class TimingRecord:
    K: int
    patches: int
    points: int
    build_s: float
    solve_s: float
    total_s: float

    @property
    def solve_per_point(self) -> float:
        return self.solve_s / self.points


def bench_scaling(curve: ParametricCurve, Ks, cfg: SolverConfig, repeats: int = 3,
                  f=None, opts: ScanOptions | None = None) -> tuple[list[TimingRecord], float]:
    """Sequential timing of the build and solve stages for each ``K``.

    The build stage is everything that depends on geometry alone: the
    partition, the reference operators and the per-patch preparation. The
    solve stage samples ``f`` and evaluates every patch fit on its refined
    grid. Assembly of the global cloud is counted in the total only.
    Reported times are medians over ``repeats``. Returns the records and
    the linearity statistic, the largest ratio of per-point solve times
    between consecutive ``K`` values (at least 1).
    """
    Ks = list(Ks)
    if len(Ks) < 3 or Ks != sorted(Ks):
        raise ValueError("bench needs at least three ascending K values")
    f = f or sepexp(2 * np.pi, 2 * np.pi)
    records = []
    for K in Ks:
        grid = GridSpec.square(K, domain_box(curve))
        builds, solves, totals = [], [], []
        for _ in range(repeats):
            # A fresh config each repeat so cached operators count as build work.
            run_cfg = replace(cfg)
            t0 = time.perf_counter()
            db = scan_partition(curve, grid, opts, cover=run_cfg.cover, cover_degree=run_cfg.cover_degree,
                                cover_delta0=run_cfg.cover_delta0)
            prepared = prepare_all(db, run_cfg)
            t1 = time.perf_counter()
            outputs = apply_all(f, prepared, run_cfg)
            t2 = time.perf_counter()
            cloud = assemble(outputs, output_spacing(grid, run_cfg))
            t3 = time.perf_counter()
            builds.append(t1 - t0)
            solves.append(t2 - t1)
            totals.append(t3 - t0)
            del prepared, outputs
        records.append(TimingRecord(K, len(db), len(cloud), statistics.median(builds),
                                    statistics.median(solves), statistics.median(totals)))
    ratios = [max(a.solve_per_point / b.solve_per_point, b.solve_per_point / a.solve_per_point)
              for a, b in zip(records, records[1:])]
    return records, max(ratios)


def timing_csv(records: list[TimingRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["K", "N_p", "points", "build_s", "solve_s", "total_s"])
    for r in records:
        w.writerow([r.K, r.patches, r.points, f"{r.build_s:.6f}", f"{r.solve_s:.6f}", f"{r.total_s:.6f}"])
    return buf.getvalue()
