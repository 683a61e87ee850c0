"""Closed parametric boundary curves, inside tests and grid-line crossings."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
DEFAULT_POINTS = {"smooth-blob": 4096, "rough-blob": 32768}
GRAZING_TOL = 1e-10
BISECTION_TOL = 1e-12

Evaluator = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]


class ParametricCurve:
    """A closed curve ``t -> (x(t), y(t))`` on ``[0, 2*pi)`` with a polyline cache.

    Parameters
    ----------
    evaluator : callable
        Vectorized map from parameter values to coordinate arrays. It must
        be ``2*pi``-periodic and accept parameters outside ``[0, 2*pi)``.
    n_points : int
        Number of polyline vertices ``t_k = 2*pi*k/n_points``.
    name : str
        Label used in logs and file output.
    """

    def __init__(self, evaluator: Evaluator, n_points: int, name: str = "curve"):
        if n_points < 8:
            raise ValueError("a closed polyline needs at least 8 points")
        self.evaluator = evaluator
        self.name = name
        self.n_points = int(n_points)
        self.t = TWO_PI * np.arange(self.n_points) / self.n_points
        x, y = self(self.t)
        self.points = np.column_stack([x, y])
        area = 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
        self.signed_area = float(area)
        self.closed = True

    def __call__(self, t) -> tuple[np.ndarray, np.ndarray]:
        x, y = self.evaluator(np.asarray(t, dtype=float))
        return np.asarray(x, dtype=float), np.asarray(y, dtype=float)

    @property
    def counterclockwise(self) -> bool:
        return self.signed_area > 0

    def derivative(self, t, step: float = 1e-6) -> tuple[np.ndarray, np.ndarray]:
        """Central-difference tangent ``(x'(t), y'(t))``."""
        t = np.asarray(t, dtype=float)
        xp, yp = self(t + step)
        xm, ym = self(t - step)
        return (xp - xm) / (2 * step), (yp - ym) / (2 * step)

    def closure_gap(self) -> float:
        x0, y0 = self(np.array([0.0]))
        x1, y1 = self(np.array([TWO_PI]))
        return float(math.hypot(x1[0] - x0[0], y1[0] - y0[0]))

    def bbox(self) -> tuple[float, float, float, float]:
        lo = self.points.min(axis=0)
        hi = self.points.max(axis=0)
        return float(lo[0]), float(hi[0]), float(lo[1]), float(hi[1])

    def coordinate(self, axis: int, t) -> np.ndarray:
        return self(t)[axis]

    def solve_coordinate(self, axis: int, value, t_lo, t_hi, tol: float = BISECTION_TOL,
                         max_iter: int = 200) -> np.ndarray:
        """Parameters where coordinate ``axis`` equals ``value`` inside brackets.

        Each bracket ``[t_lo, t_hi]`` must contain a sign change of
        ``coord(t) - value``. Bisection runs on the exact evaluator until
        the residual drops below ``tol`` or the bracket stops shrinking.
        """
        value, lo, hi = np.broadcast_arrays(np.asarray(value, float),
                                            np.asarray(t_lo, float), np.asarray(t_hi, float))
        lo = lo.astype(float).copy()
        hi = hi.astype(float).copy()
        increasing = self.coordinate(axis, hi) > self.coordinate(axis, lo)
        mid = 0.5 * (lo + hi)
        for _ in range(max_iter):
            mid = 0.5 * (lo + hi)
            g = self.coordinate(axis, mid) - value
            if np.all((np.abs(g) <= tol) | (hi - lo <= 4e-16 * np.maximum(1.0, np.abs(mid)))):
                break
            move_lo = (g < 0) == increasing
            lo = np.where(move_lo, mid, lo)
            hi = np.where(move_lo, hi, mid)
        return mid


def _smooth_blob(t: np.ndarray):
    x = 0.50 + 0.38 * np.cos(t) + 0.06 * np.cos(2 * t + 0.6) - 0.03 * np.sin(3 * t)
    y = 0.50 + 0.40 * np.sin(t) - 0.08 * np.sin(2 * t - 0.4) + 0.03 * np.cos(3 * t + 0.2)
    return x, y


def _signed_power(s: np.ndarray, p: float) -> np.ndarray:
    return np.sign(s) * np.abs(s) ** p


def rough_perturbation(t) -> np.ndarray:
    """Relative radial perturbation of the rough blob."""
    t = np.asarray(t, dtype=float)
    return (0.012 * _signed_power(np.sin(12 * t + 0.4), 1.2)
            + 0.007 * _signed_power(np.cos(17 * t - 0.2), 1.2)
            + 0.003 * np.sin(25 * t + 0.8))


def _rough_base(t: np.ndarray):
    rho = 1.0 + 0.18 * np.cos(3 * t) - 0.08 * np.sin(2 * t)
    return rho * np.cos(t), 0.82 * rho * np.sin(t)


def _rough_blob_evaluator() -> Evaluator:
    ts = TWO_PI * np.arange(1 << 16) / (1 << 16)
    bx, by = _rough_base(ts)
    lo_x, lo_y = bx.min(), by.min()
    sx = 0.84 / (bx.max() - lo_x)
    sy = 0.84 / (by.max() - lo_y)

    def evaluate(t: np.ndarray):
        x0, y0 = _rough_base(t)
        # Affine map of the base shape onto [0.08, 0.92]^2, then the radial
        # perturbation about the box centre.
        ax = 0.08 + sx * (x0 - lo_x)
        ay = 0.08 + sy * (y0 - lo_y)
        factor = 1.0 + rough_perturbation(t)
        return 0.5 + factor * (ax - 0.5), 0.5 + factor * (ay - 0.5)

    return evaluate


def builtin_curve(name: str, n_points: int | None = None) -> ParametricCurve:
    """One of the built-in test boundaries, ``smooth-blob`` or ``rough-blob``."""
    if name == "smooth-blob":
        evaluator = _smooth_blob
    elif name == "rough-blob":
        evaluator = _rough_blob_evaluator()
    else:
        raise ValueError(f"unknown curve {name!r}; expected smooth-blob or rough-blob")
    return ParametricCurve(evaluator, n_points or DEFAULT_POINTS[name], name=name)


def circle(cx: float, cy: float, radius: float, n_points: int = 4096) -> ParametricCurve:
    def evaluate(t):
        return cx + radius * np.cos(t), cy + radius * np.sin(t)

    return ParametricCurve(evaluate, n_points, name="circle")


def curve_from_samples(t, x, y, n_points: int = 8192, name: str = "user") -> ParametricCurve:
    """Closed curve through samples at uniformly spaced parameters.

    The samples are joined by a periodic cubic spline, and the parameter is
    rescaled so that one period spans ``[0, 2*pi)``.
    """
    from scipy.interpolate import CubicSpline

    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.size < 4:
        raise ValueError("need at least four samples")
    step = np.diff(t)
    if np.any(step <= 0) or np.ptp(step) > 1e-6 * np.mean(step):
        raise ValueError("sample parameters must be uniformly spaced and increasing")
    period = t[-1] - t[0] + step.mean()
    if math.hypot(x[-1] - x[0], y[-1] - y[0]) < 1e-12:
        # The last sample repeats the first; the period is then t[-1]-t[0].
        t, x, y = t[:-1], x[:-1], y[:-1]
        period -= step.mean()
    s = (t - t[0]) * (TWO_PI / period)
    knots = np.append(s, TWO_PI)
    sx = CubicSpline(knots, np.append(x, x[0]), bc_type="periodic")
    sy = CubicSpline(knots, np.append(y, y[0]), bc_type="periodic")

    def evaluate(tt):
        tt = np.mod(tt, TWO_PI)
        return sx(tt), sy(tt)

    return ParametricCurve(evaluate, n_points, name=name)


def load_curve(path, n_points: int = 8192) -> ParametricCurve:
    """Read whitespace- or comma-separated ``t x y`` rows (``#`` starts a comment)."""
    with open(path) as fh:
        text = fh.read().replace(",", " ")
    rows = [line.split("#", 1)[0].split() for line in text.splitlines()]
    data = np.array([[float(v) for v in r] for r in rows if r])
    if data.ndim != 2 or data.shape[1] != 3:
        raise ValueError(f"{path}: expected three columns t, x, y")
    return curve_from_samples(data[:, 0], data[:, 1], data[:, 2], n_points=n_points,
                              name=str(path))


def domain_box(curve: ParametricCurve, margin: float = 0.05) -> tuple[float, float, float, float]:
    """Background box for a curve: the unit square when it encloses the curve.

    Other curves get their bounding box padded by ``margin`` times its
    larger side on every edge.
    """
    a, b, c, d = curve.bbox()
    if a > 0 and b < 1 and c > 0 and d < 1:
        return (0.0, 1.0, 0.0, 1.0)
    pad = margin * max(b - a, d - c)
    return (a - pad, b + pad, c - pad, d + pad)


@dataclass(frozen=True)
class GridSpec:
    """Uniform background grid of ``Kx x Ky`` cells on a box."""

    box: tuple[float, float, float, float]
    Kx: int
    Ky: int

    def __post_init__(self):
        a, b, c, d = self.box
        if not (a < b and c < d):
            raise ValueError(f"degenerate box {self.box}")
        if self.Kx < 2 or self.Ky < 2:
            raise ValueError("need at least two cells per direction")

    @classmethod
    def square(cls, K: int, box=(0.0, 1.0, 0.0, 1.0)) -> "GridSpec":
        return cls(tuple(float(v) for v in box), int(K), int(K))

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.box[0], self.box[1], self.Kx + 1)

    @property
    def ys(self) -> np.ndarray:
        return np.linspace(self.box[2], self.box[3], self.Ky + 1)

    @property
    def hx(self) -> float:
        return (self.box[1] - self.box[0]) / self.Kx

    @property
    def hy(self) -> float:
        return (self.box[3] - self.box[2]) / self.Ky

    def lines(self, axis: int) -> np.ndarray:
        """Grid lines ``x = x_i`` for ``axis=0`` and ``y = y_j`` for ``axis=1``."""
        return self.xs if axis == 0 else self.ys

    def spacing(self, axis: int) -> float:
        return self.hx if axis == 0 else self.hy

    def origin(self, axis: int) -> float:
        return self.box[0] if axis == 0 else self.box[2]

    @property
    def diagonal(self) -> float:
        a, b, c, d = self.box
        return math.hypot(b - a, d - c)


def point_in_domain(curve: ParametricCurve, points, tol: float = 1e-12) -> np.ndarray:
    """Even-odd ray test of ``points`` (shape ``(..., 2)``) against the polyline.

    A horizontal ray to the right is cast from every point. Points whose
    horizontal distance to a crossed edge is within ``tol`` count as inside.
    """
    pts = np.asarray(points, dtype=float)
    shape = pts.shape[:-1]
    pts = pts.reshape(-1, 2)
    px, py = pts[:, 0], pts[:, 1]
    order = np.argsort(py, kind="stable")
    spy = py[order]

    a = curve.points
    b = np.roll(a, -1, axis=0)
    ylo = np.minimum(a[:, 1], b[:, 1])
    yhi = np.maximum(a[:, 1], b[:, 1])
    lo = np.searchsorted(spy, ylo, side="left")
    hi = np.searchsorted(spy, yhi, side="left")
    counts = hi - lo
    total = int(counts.sum())
    parity = np.zeros(pts.shape[0], dtype=np.int64)
    on_edge = np.zeros(pts.shape[0], dtype=bool)
    if total:
        edge = np.repeat(np.arange(a.shape[0]), counts)
        start = np.repeat(np.cumsum(counts) - counts, counts)
        pos = np.repeat(lo, counts) + (np.arange(total) - start)
        pid = order[pos]
        xa, ya = a[edge, 0], a[edge, 1]
        xb, yb = b[edge, 0], b[edge, 1]
        xc = xa + (py[pid] - ya) * (xb - xa) / (yb - ya)
        parity += np.bincount(pid, weights=(xc > px[pid]), minlength=pts.shape[0]).astype(np.int64)
        close = np.abs(xc - px[pid]) <= tol
        on_edge[pid[close]] = True
    flat = np.flatnonzero(a[:, 1] == b[:, 1])
    for e in flat:
        xl, xr = sorted((a[e, 0], b[e, 0]))
        on_edge |= (np.abs(py - a[e, 1]) <= tol) & (px >= xl - tol) & (px <= xr + tol)
    return ((parity % 2 == 1) | on_edge).reshape(shape)


@dataclass(frozen=True)
class Intersection:
    """A crossing of the curve with the grid line ``axis``-coordinate ``= lines[index]``.

    ``axis = 0`` denotes a vertical line ``x = x_i``; ``coord`` is then the
    ``y`` value of the crossing. ``direction`` is the sign of the crossing
    coordinate's derivative along the curve.
    """

    axis: int
    index: int
    coord: float
    t: float
    direction: int


def crossing_brackets(curve: ParametricCurve, axis: int, value: float):
    """Polyline edges whose endpoints straddle ``coord = value`` (half-open rule)."""
    c = curve.points[:, axis] - value
    s = c >= 0
    k = np.flatnonzero(s != np.roll(s, -1))
    return k


def line_intersections(curve: ParametricCurve, grid: GridSpec) -> dict[tuple[int, int], list[Intersection]]:
    """All crossings of the curve with every grid line, refined by bisection.

    Returns a mapping ``(axis, index) -> crossings sorted by the other
    coordinate``. Near-tangential crossings are logged and skipped.
    """
    n = curve.n_points
    dt = TWO_PI / n
    out: dict[tuple[int, int], list[Intersection]] = {}
    for axis in (0, 1):
        for idx, value in enumerate(grid.lines(axis)):
            k = crossing_brackets(curve, axis, value)
            if k.size == 0:
                out[(axis, idx)] = []
                continue
            c0 = curve.points[k, axis]
            c1 = curve.points[(k + 1) % n, axis]
            slope = (c1 - c0) / dt
            graze = np.abs(slope) < GRAZING_TOL
            if graze.any():
                log.warning("skipping %d grazing crossings on line axis=%d index=%d",
                            int(graze.sum()), axis, idx)
                k, slope = k[~graze], slope[~graze]
            t_lo = curve.t[k]
            t_hi = t_lo + dt
            ts = curve.solve_coordinate(axis, np.full(k.size, value), t_lo, t_hi)
            other = curve.coordinate(1 - axis, ts)
            order = np.argsort(other, kind="stable")
            out[(axis, idx)] = [
                Intersection(axis, idx, float(other[j]), float(ts[j] % TWO_PI), int(np.sign(slope[j])))
                for j in order
            ]
    return out


def winding_number(curve: ParametricCurve, points) -> np.ndarray:
    """Winding number of the polyline around each point (angle summation)."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    a = curve.points
    b = np.roll(a, -1, axis=0)
    total = np.zeros(pts.shape[0])
    for start in range(0, a.shape[0], 2048):
        sa, sb = a[start:start + 2048], b[start:start + 2048]
        ua = sa[None, :, :] - pts[:, None, :]
        ub = sb[None, :, :] - pts[:, None, :]
        cross = ua[..., 0] * ub[..., 1] - ua[..., 1] * ub[..., 0]
        dot = np.sum(ua * ub, axis=-1)
        total += np.arctan2(cross, dot).sum(axis=1)
    return np.rint(total / TWO_PI).astype(int)
