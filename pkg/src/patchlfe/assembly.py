"""Global point cloud assembly and patchwise error metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .patches import PatchRecord, PatchType
from .solvers import PatchOutput


@dataclass
class PointCloud:
    """Deduplicated output points with the value of the first patch that produced each."""

    points: np.ndarray
    values: np.ndarray
    patch: np.ndarray
    keys: np.ndarray

    def __len__(self) -> int:
        return self.points.shape[0]


def dedupe_keys(points: np.ndarray, spacing: float) -> np.ndarray:
    """Integer keys of points quantized at half the fine-grid ``spacing``."""
    return np.rint(np.asarray(points) / (0.5 * spacing)).astype(np.int64)


def assemble(outputs: list[PatchOutput], spacing: float) -> PointCloud:
    """Merge patch outputs in order; the first patch to emit a key keeps it.

    Masked-out points are never inserted. ``spacing`` is the refined output
    spacing of the Rect patches.
    """
    pts, vals, owner = [], [], []
    for order, out in enumerate(outputs):
        m = out.mask
        pts.append(out.points[m])
        vals.append(out.values[m])
        owner.append(np.full(int(m.sum()), out.index if out.index >= 0 else order, dtype=np.int64))
    if not pts:
        empty = np.empty((0, 2))
        return PointCloud(empty, np.empty(0, complex), np.empty(0, np.int64), np.empty((0, 2), np.int64))
    p = np.concatenate(pts)
    v = np.concatenate(vals)
    o = np.concatenate(owner)
    keys = dedupe_keys(p, spacing)
    # Pack both integer keys into one so the uniqueness pass is 1-D.
    kx = keys[:, 0] - keys[:, 0].min()
    packed = kx * (int(keys[:, 1].max() - keys[:, 1].min()) + 1) + (keys[:, 1] - keys[:, 1].min())
    # np.unique reports the first occurrence of each key in concatenation
    # order, which is exactly the first-writer-wins rule.
    _, first = np.unique(packed, return_index=True)
    first.sort()
    return PointCloud(p[first], v[first], o[first], keys[first])


@dataclass
class ErrorReport:
    """Patchwise maximum errors summarized per patch type."""

    per_patch: np.ndarray
    type_max: dict[str, float]
    type_mean: dict[str, float]
    type_count: dict[str, int]
    global_max: float
    points: int

    def summary_lines(self) -> list[str]:
        lines = [f"global_max_error = {self.global_max:.6e}", f"retained_points = {self.points}"]
        for t in PatchType:
            name = t.value
            if self.type_count.get(name):
                lines.append(f"{name}: count = {self.type_count[name]}, "
                             f"Einf_max = {self.type_max[name]:.6e}, "
                             f"Einf_avg = {self.type_mean[name]:.6e}")
        return lines


def pointwise_errors(cloud: PointCloud, f) -> np.ndarray:
    exact = np.asarray(f(cloud.points[:, 0], cloud.points[:, 1]), dtype=complex)
    return np.abs(cloud.values - exact)


def error_report(cloud: PointCloud, f, patches: list[PatchRecord],
                 errors: np.ndarray | None = None) -> ErrorReport:
    """Per-patch maxima over retained points, their per-type max and mean, and the global max."""
    err = pointwise_errors(cloud, f) if errors is None else errors
    n = len(patches)
    per_patch = np.full(n, np.nan)
    if err.size:
        order = np.argsort(cloud.patch, kind="stable")
        owners, starts = np.unique(cloud.patch[order], return_index=True)
        maxima = np.maximum.reduceat(err[order], starts)
        per_patch[owners] = maxima
    type_max, type_mean, type_count = {}, {}, {}
    for t in PatchType:
        idx = [i for i, p in enumerate(patches) if p.kind is t]
        type_count[t.value] = len(idx)
        vals = per_patch[idx] if idx else np.empty(0)
        vals = vals[~np.isnan(vals)]
        type_max[t.value] = float(vals.max()) if vals.size else 0.0
        type_mean[t.value] = float(vals.mean()) if vals.size else 0.0
    gmax = float(err.max()) if err.size else 0.0
    return ErrorReport(per_patch, type_max, type_mean, type_count, gmax, len(cloud))
