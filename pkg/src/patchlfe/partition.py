"""Scan-based decomposition of a curved domain into local patches.

The boundary is traversed counterclockwise and labelled by the dominant
direction of its outward normal: ``Top`` where the normal points mostly up,
``Right`` where it points mostly right, and so on. Normals are smoothed
over about one cell before labelling, and a label only changes once the
normal has moved clearly into the next sector. Small-scale roughness
therefore does not fragment the boundary into tiny arcs.

Every labelled arc is a graph over its straight axis and is cut at the grid
lines crossing that axis. Each piece becomes one curved patch whose
straight base lies one cell inside the cell row (or column) reached by the
curve. Arc-end pieces are widened to the full cell column (row) where the
curve stays a graph there; such widened pieces overlap the neighbouring arc
and are flagged as corner covers. Interior cells that the curved patches do
not already cover become Rect patches.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import TWO_PI, GridSpec, ParametricCurve, line_intersections, point_in_domain
from .patches import PatchRecord, PatchType, attach_cover

EXTERIOR, BOUNDARY, INTERIOR = 0, 1, 2

# Centre angle (degrees) of each boundary label's normal sector.
_SECTOR_CENTRE = {PatchType.RIGHT: 0.0, PatchType.TOP: 90.0,
                  PatchType.LEFT: 180.0, PatchType.BOTTOM: -90.0}
_SECTOR_ORDER = (PatchType.RIGHT, PatchType.TOP, PatchType.LEFT, PatchType.BOTTOM)


class PartitionError(RuntimeError):
    """The scan could not produce valid patches; a finer grid usually helps."""


@dataclass(frozen=True)
class ScanOptions:
    """Tuning knobs of the boundary scan.

    Attributes
    ----------
    smoothing : float
        Width of the Gaussian normal smoothing, in cell sizes.
    hysteresis : float
        Angle in degrees the smoothed normal must enter a new sector by
        before the label switches.
    sliver : float
        Pieces narrower than this fraction of a cell are merged into their
        neighbour.
    slope_cap : float
        Largest slope a widened arc-end piece may reach.
    depth : int
        Whole cells between a patch base and the cell containing the curve.
    """

    smoothing: float = 1.0
    hysteresis: float = 10.0
    sliver: float = 0.1
    slope_cap: float = 3.0
    depth: int = 1


class BoundaryGraph:
    """The curve between two traversal parameters viewed as a graph over one axis.

    Parameters ``tau`` run counterclockwise; the physical parameter is
    ``orient * tau``.
    """

    TABLE_SIZE = 65

    def __init__(self, curve: ParametricCurve, axis: int, tau_lo: float, tau_hi: float, orient: int):
        self.curve = curve
        self.axis = axis
        self.tau_lo = float(tau_lo)
        self.tau_hi = float(tau_hi)
        self.orient = orient
        self._table = None

    def point(self, tau):
        return self.curve(self.orient * np.asarray(tau, dtype=float))

    def _coord(self, tau) -> np.ndarray:
        return self.curve.coordinate(self.axis, self.orient * np.asarray(tau, dtype=float))

    def parameter(self, c) -> np.ndarray:
        """Traversal parameters where the straight coordinate equals ``c``."""
        c = np.atleast_1d(np.asarray(c, dtype=float))
        if self._table is None:
            taus = np.linspace(self.tau_lo, self.tau_hi, self.TABLE_SIZE)
            self._table = (taus, self._coord(taus))
        return _monotone_root(self._coord, c, *self._table)

    def __call__(self, c) -> np.ndarray:
        shape = np.shape(c)
        tau = self.parameter(c)
        return self.curve.coordinate(1 - self.axis, self.orient * tau).reshape(shape)


def _monotone_root(coord, c: np.ndarray, taus: np.ndarray, vals: np.ndarray,
                   max_iter: int = 60) -> np.ndarray:
    # Safeguarded Newton for a coordinate that is monotone over the sample
    # table. The table gives a tight bracket and a linear first guess; steps
    # leaving the bracket fall back to bisection. Targets equal to an end
    # value converge to that end.
    sign = 1.0 if vals[-1] >= vals[0] else -1.0
    key = np.maximum.accumulate(sign * vals)
    target = sign * c
    j = np.clip(np.searchsorted(key, target), 1, taus.size - 1)
    a, b = taus[j - 1].copy(), taus[j].copy()
    fa, fb = key[j - 1] - target, key[j] - target
    span = np.where(fb > fa, fb - fa, 1.0)
    x = np.clip(a + (b - a) * (-fa) / span, a, b)
    step = 1e-7 * max(1.0, abs(taus[-1] - taus[0]))
    scale = np.maximum(1.0, np.abs(taus).max())
    for _ in range(max_iter):
        fx = sign * coord(x) - target
        done = fx == 0
        below = fx < 0
        a = np.where(below, x, a)
        b = np.where(below | done, b, x)
        slope = sign * (coord(x + step) - coord(x - step)) / (2 * step)
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = x - fx / slope
        bad = ~np.isfinite(newton) | (newton <= a) | (newton >= b)
        nxt = np.where(done, x, np.where(bad, 0.5 * (a + b), newton))
        if np.all(np.abs(nxt - x) <= 4e-16 * scale):
            return nxt
        x = nxt
    return x


@dataclass
class PatchDatabase:
    """Ordered patches of one decomposition.

    Boundary patches come first in counterclockwise scan order, then Rect
    patches row by row.
    """

    patches: list[PatchRecord]
    grid: GridSpec
    curve: ParametricCurve
    cell_class: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.patches)

    def __iter__(self):
        return iter(self.patches)

    def __getitem__(self, i) -> PatchRecord:
        return self.patches[i]

    def counts(self) -> dict[str, int]:
        out = {t.value: 0 for t in PatchType}
        for p in self.patches:
            out[p.kind.value] += 1
        out["corner"] = sum(p.corner for p in self.patches)
        out["total"] = len(self.patches)
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "type", "x_lo", "x_hi", "y_lo", "y_hi", "corner", "cover_delta"])
        for i, p in enumerate(self.patches):
            b = p.bounds()
            w.writerow([i, p.kind.value, *(f"{v:.17g}" for v in b), int(p.corner),
                        "" if p.cover is None else f"{p.cover.delta:.17g}"])
        return buf.getvalue()


def classify_cells(curve: ParametricCurve, grid: GridSpec, crossings=None) -> np.ndarray:
    """Cell classes indexed ``[i, j]`` (column ``i``, row ``j``).

    A cell is boundary when an edge carries a crossing or its corners
    disagree, interior when all corners are inside and no edge is crossed,
    and exterior otherwise.
    """
    if crossings is None:
        crossings = line_intersections(curve, grid)
    xs, ys = grid.xs, grid.ys
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    inside = point_in_domain(curve, np.stack([gx, gy], axis=-1))
    corners = np.stack([inside[:-1, :-1], inside[1:, :-1], inside[:-1, 1:], inside[1:, 1:]])
    all_in = corners.all(axis=0)
    any_in = corners.any(axis=0)
    crossed = np.zeros((grid.Kx, grid.Ky), dtype=bool)
    for (axis, idx), items in crossings.items():
        for it in items:
            if axis == 0:
                j = min(max(int(math.floor((it.coord - ys[0]) / grid.hy)), 0), grid.Ky - 1)
                for i in (idx - 1, idx):
                    if 0 <= i < grid.Kx:
                        crossed[i, j] = True
            else:
                i = min(max(int(math.floor((it.coord - xs[0]) / grid.hx)), 0), grid.Kx - 1)
                for j in (idx - 1, idx):
                    if 0 <= j < grid.Ky:
                        crossed[i, j] = True
    cls = np.full((grid.Kx, grid.Ky), EXTERIOR, dtype=np.int8)
    cls[crossed | (any_in & ~all_in)] = BOUNDARY
    cls[all_in & ~crossed] = INTERIOR
    return cls


def _gaussian_smooth_periodic(values: np.ndarray, sigma_samples: float) -> np.ndarray:
    n = values.shape[0]
    k = np.fft.fftfreq(n)
    kernel = np.exp(-2.0 * (math.pi * k * sigma_samples) ** 2)
    return np.real(np.fft.ifft(np.fft.fft(values, axis=0) * kernel[:, None], axis=0))


def _label(angle_deg: float, current: PatchType | None, hysteresis: float) -> PatchType:
    best = min(_SECTOR_ORDER, key=lambda t: abs(_wrap(angle_deg - _SECTOR_CENTRE[t])))
    if current is None or best is current:
        return best
    if abs(_wrap(angle_deg - _SECTOR_CENTRE[best])) < 45.0 - hysteresis:
        return best
    return current


def _wrap(a):
    return (a + 180.0) % 360.0 - 180.0


@dataclass
class _Arc:
    kind: PatchType
    tau0: float
    tau1: float


def boundary_arcs(curve: ParametricCurve, grid: GridSpec, opts: ScanOptions) -> tuple[list[_Arc], int]:
    """Counterclockwise arcs with constant normal label, and the orientation sign."""
    orient = 1 if curve.counterclockwise else -1
    n = curve.n_points
    # Uniform arclength resampling in counterclockwise traversal order.
    tau_v = np.arange(n + 1) * (TWO_PI / n)
    x, y = curve(orient * tau_v)
    seg = np.hypot(np.diff(x), np.diff(y))
    s = np.concatenate([[0.0], np.cumsum(seg)])
    length = s[-1]
    s_uni = np.arange(n) * (length / n)
    tau = np.interp(s_uni, s, tau_v)
    dx, dy = curve.derivative(orient * tau)
    dx, dy = orient * dx, orient * dy
    norm = np.hypot(dx, dy)
    normals = np.column_stack([dy / norm, -dx / norm])
    sigma = opts.smoothing * min(grid.hx, grid.hy) / (length / n)
    sm = _gaussian_smooth_periodic(normals, sigma)
    angle = np.degrees(np.arctan2(sm[:, 1], sm[:, 0]))

    start = int(np.argmin(np.abs(_wrap(angle - 90.0))))
    order = (start + np.arange(n)) % n
    labels = []
    current = None
    for k in order:
        current = _label(angle[k], current, opts.hysteresis)
        labels.append(current)
    # Re-scan once so the wrap-around at the start uses the settled label.
    current = labels[-1]
    labels = []
    for k in order:
        current = _label(angle[k], current, opts.hysteresis)
        labels.append(current)

    # Split positions: where the label changes, moved back to the last
    # crossing of the sector edge so arcs end near the 45-degree slope.
    arcs: list[_Arc] = []
    run_start = 0
    tau_seq = tau[order]
    tau_seq = np.where(tau_seq < tau_seq[0], tau_seq + TWO_PI, tau_seq)
    splits = []
    for k in range(1, n):
        if labels[k] is not labels[k - 1]:
            old = labels[k - 1]
            j = k
            while j > run_start + 1 and _label(angle[order[j - 1]], None, 0.0) is not old:
                j -= 1
            splits.append((j, labels[k]))
            run_start = k
    bounds = [0] + [j for j, _ in splits] + [n]
    kinds = [labels[0]] + [lab for _, lab in splits]
    tau_end = tau_seq[0] + TWO_PI
    for a, b, kind in zip(bounds[:-1], bounds[1:], kinds):
        t0 = tau_seq[a]
        t1 = tau_seq[b] if b < n else tau_end
        if t1 > t0:
            arcs.append(_Arc(kind, float(t0), float(t1)))
    # Merge the wrap-around: the last arc continues into the first when labels match.
    if len(arcs) > 1 and arcs[-1].kind is arcs[0].kind:
        first = arcs.pop(0)
        arcs[-1] = _Arc(first.kind, arcs[-1].tau0, first.tau1 + TWO_PI)
    return arcs, orient


def _straight_axis(kind: PatchType) -> int:
    return kind.straight_axis


def _direction(kind: PatchType) -> int:
    # Sign of d(straight coordinate)/d(tau) along a counterclockwise traversal.
    return {PatchType.TOP: -1, PatchType.BOTTOM: 1, PatchType.RIGHT: 1, PatchType.LEFT: -1}[kind]


def _dense(curve, orient, t0, t1, count):
    tau = np.linspace(t0, t1, count)
    x, y = curve(orient * tau)
    return tau, x, y


def _extend(curve, orient, kind, tau_edge, target, backward, opts, h):
    """Parameter where the graph reaches ``target`` beyond an arc end, or None.

    Walks away from ``tau_edge`` while the straight coordinate keeps moving
    in the arc's direction and the slope stays below the cap.
    """
    axis = _straight_axis(kind)
    direction = _direction(kind) * (-1 if backward else 1)
    span = 4.0 * h
    step_count = 4097
    sgn = -1.0 if backward else 1.0
    tau, x, y = _dense(curve, orient, tau_edge, tau_edge + sgn * TWO_PI * 0.25, step_count)
    c = (x, y)[axis]
    o = (x, y)[1 - axis]
    dc = np.diff(c) * direction
    do = np.diff(o)
    travelled = (c - c[0]) * direction
    goal = (target - c[0]) * direction
    if goal <= 0:
        return tau_edge
    ok = dc > 0
    slope_ok = np.abs(do) <= opts.slope_cap * np.maximum(dc, 0)
    for k in range(dc.size):
        if not (ok[k] and slope_ok[k]):
            return None
        if travelled[k + 1] >= goal:
            lo, hi = sorted((tau[k], tau[k + 1]))
            g = BoundaryGraph(curve, axis, lo, hi, orient)
            return float(g.parameter(target)[0])
        if travelled[k + 1] > span:
            return None
    return None


def _graph_ok(curve, orient, kind, t0, t1, count=2049) -> bool:
    axis = _straight_axis(kind)
    _, x, y = _dense(curve, orient, t0, t1, count)
    c = (x, y)[axis]
    return bool(np.all(np.diff(c) * _direction(kind) > 0))


@dataclass
class _Piece:
    kind: PatchType
    lo: float
    hi: float
    tau0: float
    tau1: float
    corner: bool = False


def _arc_pieces(curve, orient, arc: _Arc, grid: GridSpec, opts: ScanOptions) -> list[_Piece]:
    kind = arc.kind
    axis = _straight_axis(kind)
    lines = grid.lines(axis)
    h = grid.spacing(axis)
    direction = _direction(kind)
    if not _graph_ok(curve, orient, kind, arc.tau0, arc.tau1):
        x, y = curve(orient * np.array([0.5 * (arc.tau0 + arc.tau1)]))
        raise PartitionError(
            f"{kind.value} arc near ({x[0]:.4f}, {y[0]:.4f}) is not a graph over its axis")
    c0 = float(curve.coordinate(axis, orient * np.array([arc.tau0]))[0])
    c1 = float(curve.coordinate(axis, orient * np.array([arc.tau1]))[0])
    graph = BoundaryGraph(curve, axis, arc.tau0, arc.tau1, orient)
    inner = [v for v in lines if min(c0, c1) < v < max(c0, c1)]
    cuts = sorted(inner, reverse=direction < 0)
    coords = [c0] + cuts + [c1]
    taus = [arc.tau0] + [float(graph.parameter(v)[0]) for v in cuts] + [arc.tau1]
    def cell_edge(coord, outward):
        # Grid line bounding the cell that contains ``coord`` on the side ``outward``.
        k = (coord - lines[0]) / h
        idx = math.floor(k + 1e-12) if outward < 0 else math.ceil(k - 1e-12)
        return float(lines[min(max(idx, 0), lines.size - 1)])

    # Widen the arc-end pieces to whole cells where the curve allows it.
    corner_start = corner_end = False
    target = cell_edge(c0, -direction)
    tau_new = _extend(curve, orient, kind, arc.tau0, target, True, opts, h)
    if tau_new is not None and target != c0:
        coords[0], taus[0], corner_start = target, tau_new, True
    target = cell_edge(c1, direction)
    tau_new = _extend(curve, orient, kind, arc.tau1, target, False, opts, h)
    if tau_new is not None and target != c1:
        coords[-1], taus[-1], corner_end = target, tau_new, True

    pieces = []
    count = len(coords) - 1
    for k, (a, b, ta, tb) in enumerate(zip(coords[:-1], coords[1:], taus[:-1], taus[1:])):
        corner = (k == 0 and corner_start) or (k == count - 1 and corner_end)
        pieces.append(_Piece(kind, min(a, b), max(a, b), ta, tb, corner))

    # Merge slivers into the neighbouring piece of the same arc.
    merged: list[_Piece] = []
    for p in pieces:
        if merged and (p.hi - p.lo < opts.sliver * h or merged[-1].hi - merged[-1].lo < opts.sliver * h):
            q = merged.pop()
            merged.append(_Piece(kind, min(q.lo, p.lo), max(q.hi, p.hi), q.tau0, p.tau1, q.corner or p.corner))
        else:
            merged.append(p)
    return [p for p in merged if p.hi - p.lo >= opts.sliver * h]


def _patch_base(graph: BoundaryGraph, kind: PatchType, lo: float, hi: float, grid: GridSpec, depth: int):
    axis = 1 - _straight_axis(kind)
    lines = grid.lines(axis)
    h = grid.spacing(axis)
    g = graph(np.linspace(lo, hi, 129))
    if kind.sign > 0:
        k = math.floor((g.min() - lines[0]) / h + 1e-9) - depth
    else:
        k = math.ceil((g.max() - lines[0]) / h - 1e-9) + depth
    return float(lines[0] + k * h), g


def _inside_probe(curve: ParametricCurve, patch: PatchRecord) -> bool:
    u = np.linspace(*patch.span, 17)
    eta = np.linspace(0.0, 0.98, 12)
    base = patch.local_base
    top = patch.local_boundary(u)
    vv = base + eta[:, None] * (top - base)[None, :]
    uu = np.broadcast_to(u, vv.shape)
    x, y = patch.to_physical(uu, vv)
    return bool(point_in_domain(curve, np.stack([x, y], axis=-1)).all())


def scan_partition(curve: ParametricCurve, grid: GridSpec, opts: ScanOptions | None = None,
                   cover: bool = False, cover_degree: int = 3, cover_delta0: float | None = None
                   ) -> PatchDatabase:
    """Decompose the domain bounded by ``curve`` into Rect and curved patches.

    With ``cover=True`` every curved patch also carries a smooth polynomial
    cover with clearance ``cover_delta0`` (default: a thousandth of the box
    diagonal).
    """
    opts = opts or ScanOptions()
    if _on_grid_lines(curve, grid):
        return _cell_union(curve, grid)
    crossings = line_intersections(curve, grid)
    cls = classify_cells(curve, grid, crossings)
    arcs, orient = boundary_arcs(curve, grid, opts)
    if cover_delta0 is None:
        cover_delta0 = 1e-3 * grid.diagonal

    patches: list[PatchRecord] = []
    for arc in arcs:
        for piece in _arc_pieces(curve, orient, arc, grid, opts):
            kind = piece.kind
            axis = _straight_axis(kind)
            t0, t1 = sorted((piece.tau0, piece.tau1))
            graph = BoundaryGraph(curve, axis, t0, t1, orient)
            h_t = grid.spacing(1 - axis)
            for depth in range(opts.depth, -1, -1):
                base, g = _patch_base(graph, kind, piece.lo, piece.hi, grid, depth)
                height = kind.sign * (g - base)
                if height.min() < 0.1 * h_t:
                    continue
                cand = PatchRecord(kind, (piece.lo, piece.hi), base, boundary=graph,
                                   cells=_cells(grid, kind, piece.lo, piece.hi, base, g),
                                   corner=piece.corner, t_range=(orient * t0, orient * t1))
                if _inside_probe(curve, cand):
                    break
            else:
                mid = 0.5 * (piece.lo + piece.hi)
                raise PartitionError(
                    f"{kind.value} patch at straight coordinate {mid:.4f} leaves the domain; "
                    "increase K")
            if cover:
                cand = attach_cover(cand, cover_degree, cover_delta0)
            patches.append(cand)

    xs, ys = grid.xs, grid.ys
    curved = [(p, p.bounds(17)) for p in patches]
    for j in range(grid.Ky):
        for i in range(grid.Kx):
            if cls[i, j] == INTERIOR and not _cell_covered(curved, xs[i], xs[i + 1], ys[j], ys[j + 1]):
                patches.append(PatchRecord(PatchType.RECT, (float(xs[i]), float(xs[i + 1])),
                                           extent=(float(ys[j]), float(ys[j + 1])), cells=((i, j),)))
    return PatchDatabase(patches, grid, curve, cls)


def _on_grid_lines(curve: ParametricCurve, grid: GridSpec, tol: float = 1e-12) -> bool:
    """Whether every polyline vertex and edge midpoint lies on some grid line."""
    pts = curve.points
    probes = np.vstack([pts, 0.5 * (pts + np.roll(pts, -1, axis=0))])
    scale = tol * max(1.0, grid.diagonal)

    def near(values, lines):
        k = np.clip(np.searchsorted(lines, values), 1, len(lines) - 1)
        return np.minimum(np.abs(values - lines[k - 1]), np.abs(values - lines[k])) <= scale

    return bool(np.all(near(probes[:, 0], grid.xs) | near(probes[:, 1], grid.ys)))


def _cell_union(curve: ParametricCurve, grid: GridSpec) -> PatchDatabase:
    """Partition of a domain whose boundary runs along grid lines: one Rect per inside cell."""
    xs, ys = grid.xs, grid.ys
    cx, cy = np.meshgrid(0.5 * (xs[:-1] + xs[1:]), 0.5 * (ys[:-1] + ys[1:]), indexing="ij")
    inside = point_in_domain(curve, np.stack([cx, cy], axis=-1))
    cls = np.where(inside, INTERIOR, EXTERIOR).astype(np.int8)
    patches = [PatchRecord(PatchType.RECT, (float(xs[i]), float(xs[i + 1])),
                           extent=(float(ys[j]), float(ys[j + 1])), cells=((i, j),))
               for j in range(grid.Ky) for i in range(grid.Kx) if inside[i, j]]
    return PatchDatabase(patches, grid, curve, cls)


def _cell_covered(curved, x0, x1, y0, y1, samples: int = 13) -> bool:
    """Whether curved patches jointly contain a cell (checked on a sample lattice)."""
    s = np.linspace(0.0, 1.0, samples)
    gx, gy = np.meshgrid(x0 + s * (x1 - x0), y0 + s * (y1 - y0))
    gx, gy = gx.ravel(), gy.ravel()
    ok = np.zeros(gx.size, dtype=bool)
    for p, (bx0, bx1, by0, by1) in curved:
        if bx0 > x1 or bx1 < x0 or by0 > y1 or by1 < y0:
            continue
        ok |= p.contains(gx, gy, tol=1e-12)
        if ok.all():
            return True
    return False


def _cells(grid: GridSpec, kind: PatchType, lo: float, hi: float, base: float, g: np.ndarray):
    axis = _straight_axis(kind)
    a_lines, b_lines = grid.lines(axis), grid.lines(1 - axis)
    ha, hb = grid.spacing(axis), grid.spacing(1 - axis)
    ia0 = int(math.floor((lo - a_lines[0]) / ha + 1e-9))
    ia1 = int(math.ceil((hi - a_lines[0]) / ha - 1e-9))
    vlo, vhi = min(base, g.min()), max(base, g.max())
    ib0 = int(math.floor((vlo - b_lines[0]) / hb + 1e-9))
    ib1 = int(math.ceil((vhi - b_lines[0]) / hb - 1e-9))
    cells = []
    for ia in range(ia0, ia1):
        for ib in range(ib0, ib1):
            cells.append((ia, ib) if axis == 0 else (ib, ia))
    return tuple(cells)


def coverage_gaps(db: PatchDatabase, spacing: float | None = None) -> np.ndarray:
    """Inside lattice points not covered by any patch (empty when coverage holds).

    The lattice defaults to the Rect sampling spacing ``h / 24``.
    """
    grid = db.grid
    a, b, c, d = grid.box
    step = spacing or min(grid.hx, grid.hy) / 24
    xs = np.arange(a, b + 0.5 * step, step)
    ys = np.arange(c, d + 0.5 * step, step)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([gx.ravel(), gy.ravel()], axis=-1)
    inside = point_in_domain(db.curve, pts)
    covered = np.zeros(pts.shape[0], dtype=bool)
    for p in db.patches:
        x0, x1, y0, y1 = p.bounds()
        sel = np.flatnonzero(inside & ~covered & (pts[:, 0] >= x0 - 1e-12) & (pts[:, 0] <= x1 + 1e-12)
                             & (pts[:, 1] >= y0 - 1e-12) & (pts[:, 1] <= y1 + 1e-12))
        if sel.size:
            covered[sel] = p.contains(pts[sel, 0], pts[sel, 1], tol=1e-9)
    return pts[inside & ~covered]
