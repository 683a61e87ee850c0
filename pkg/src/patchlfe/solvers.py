"""Per-patch local Fourier extension solvers.

Every solver samples the target function on a patch, fits a tensor Fourier
extension on the reference rectangle ``[0, 2*pi/T_x] x [0, 2*pi/T_y]`` and
evaluates it on a refined tensor grid of ``(r(m-1)+1)^2`` points mapped
back to the patch. Curved patches first pass every column through a 1-D
extension fit that moves the samples onto equispaced normalized heights
``eta = (v - v_base) / (g(u) - v_base)``.

Everything except the sampled values depends on geometry alone, so a solve
is split into :func:`prepare_patch`, which builds the sample points and
the linear column maps, and :func:`apply_prepared`, which samples a
function and applies those maps. A prepared patch can be reused for any
number of functions.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from .fe1d import (
    CompletionImpossibleError,
    Fe1dOperator,
    Fe1dParams,
    batched_transfer_matrices,
    build_custom_operator,
    build_uniform_operator,
    completion_weights,
)
from .linalg import DegenerateSystemError, NoConstraintError
from .patches import PatchRecord, PatchType

log = logging.getLogger(__name__)

Oracle = Callable[[np.ndarray, np.ndarray], np.ndarray]

SAMPLING_MODES = ("grid", "uniform")


class NumericFailure(RuntimeError):
    """Raised when a patch solve meets non-finite data or a degenerate column."""


@dataclass(frozen=True)
class FineGrid:
    """Background sampling lattice ``origin + k * step`` along each physical axis."""

    origin: tuple[float, float]
    step: tuple[float, float]

    def levels(self, axis: int, lo: float, hi: float) -> np.ndarray:
        """Lattice coordinates within ``[lo, hi]`` (inclusive up to rounding)."""
        o, h = self.origin[axis], self.step[axis]
        k0 = int(np.ceil((lo - o) / h - 1e-9))
        k1 = int(np.floor((hi - o) / h + 1e-9))
        if k1 < k0:
            return np.empty(0)
        return o + h * np.arange(k0, k1 + 1)


@dataclass(frozen=True)
class SolverConfig:
    """Parameters shared by all patch solves of a run.

    Attributes
    ----------
    fe_x, fe_y : Fe1dParams
        Reference extension parameters along the straight and transverse axes.
    refine : int
        Output refinement factor ``r``.
    sampling : str
        ``"grid"`` samples curved columns at background lattice nodes plus
        the boundary point; ``"uniform"`` samples them at the target heights.
    cover : bool
        Whether patches carrying a smooth cover use the covered solver.
    cover_degree, cover_delta0 :
        Polynomial degree and clearance of smooth covers. ``None`` for the
        clearance means a thousandth of the background box diagonal.
    n_min : int
        Minimum number of source nodes per curved column.
    """

    fe_x: Fe1dParams = field(default_factory=Fe1dParams)
    fe_y: Fe1dParams = field(default_factory=Fe1dParams)
    refine: int = 5
    sampling: str = "grid"
    cover: bool = False
    cover_degree: int = 3
    cover_delta0: float | None = None
    n_min: int = 8

    def __post_init__(self):
        if self.refine < 1:
            raise ValueError("refinement factor must be at least 1")
        if self.sampling not in SAMPLING_MODES:
            raise ValueError(f"sampling must be one of {SAMPLING_MODES}")
        if self.cover and self.n_min < self.cover_degree + 2:
            raise ValueError("n_min must be at least cover_degree + 2 when covers are enabled")

    @cached_property
    def op_x(self) -> Fe1dOperator:
        return build_uniform_operator(self.fe_x)

    @cached_property
    def op_y(self) -> Fe1dOperator:
        return build_uniform_operator(self.fe_y)

    @cached_property
    def out_x(self) -> np.ndarray:
        """Transfer from the ``m_x`` reference nodes to the refined points."""
        return self.op_x.transfer_matrix(self.refined(0) * self.fe_x.length)

    @cached_property
    def out_y(self) -> np.ndarray:
        return self.op_y.transfer_matrix(self.refined(1) * self.fe_y.length)

    @cached_property
    def _refined(self) -> tuple[np.ndarray, np.ndarray]:
        pts = []
        for m in (self.fe_x.m, self.fe_y.m):
            r = np.linspace(0.0, 1.0, self.refine * (m - 1) + 1)
            r.flags.writeable = False
            pts.append(r)
        return pts[0], pts[1]

    def warm(self) -> "SolverConfig":
        """Build the shared operators now (they are read-only afterwards)."""
        self.out_x, self.out_y, self._refined
        return self

    @property
    def m(self) -> tuple[int, int]:
        return self.fe_x.m, self.fe_y.m

    def refined(self, axis: int) -> np.ndarray:
        """Refined reference points in ``[0, 1]`` along an axis (read-only)."""
        return self._refined[axis]


@dataclass
class PatchOutput:
    """Refined-grid values of one patch.

    ``points`` and ``values`` are flattened in row-major order of the
    refined ``(v, u)`` grid; ``mask`` marks points that belong to the
    physical patch.
    """

    points: np.ndarray
    values: np.ndarray
    mask: np.ndarray
    index: int = -1

    @property
    def retained(self) -> int:
        return int(np.count_nonzero(self.mask))


@dataclass
class PreparedPatch:
    """Geometry-only data of one patch solve.

    Attributes
    ----------
    samples : ndarray, shape (S, 2)
        Physical points where the target function is sampled.
    gather : ndarray of int, optional
        Curved patches: ``(m_x, M)`` positions into ``samples`` of each
        column's sources, padded with ``S`` (a zero slot).
    maps : ndarray, optional
        Curved patches: ``(m_x, m_y, M)`` column maps from sources to the
        ``m_y`` reference heights. ``None`` when sources already sit at
        those heights.
    tops : ndarray, optional
        Local top of the computational patch at the refined straight-axis
        points (the cover for covered patches).
    mask : ndarray of bool, optional
        Refined points kept in the output (covered patches only).
    """

    patch: PatchRecord
    index: int
    solver: str
    samples: np.ndarray
    gather: np.ndarray | None = None
    maps: np.ndarray | None = None
    tops: np.ndarray | None = None
    mask: np.ndarray | None = None


def _sample(f: Oracle, x, y) -> np.ndarray:
    vals = np.asarray(f(np.asarray(x, float), np.asarray(y, float)), dtype=complex)
    if not np.all(np.isfinite(vals)):
        raise NumericFailure("target function returned non-finite values")
    return vals


def _unit(op: Fe1dOperator) -> np.ndarray:
    return op.nodes / op.params.length


def _patch_label(patch: PatchRecord, index: int) -> str:
    where = f"patch {index} " if index >= 0 else ""
    return f"{where}({patch.kind.value}, span {patch.span[0]:.6g}..{patch.span[1]:.6g})"


# Column sources -----------------------------------------------------------------

def _lattice_levels(patch: PatchRecord, grid: FineGrid, lo: float, hi: float) -> np.ndarray:
    """Background lattice heights in the local transverse coordinate within ``[lo, hi]``."""
    axis = 1 - patch.kind.straight_axis
    s = patch.kind.sign
    phys = grid.levels(axis, min(s * lo, s * hi), max(s * lo, s * hi))
    return np.sort(s * phys)


def _merge_uniform(nodes: np.ndarray, lo: float, hi: float, count: int) -> np.ndarray:
    # Add equispaced nodes and drop lattice nodes that crowd them.
    uni = np.linspace(lo, hi, count)
    gap = 0.2 * (hi - lo) / (count - 1)
    keep = [v for v in nodes if np.min(np.abs(uni - v)) > gap]
    return np.sort(np.concatenate([uni, keep]))


def column_sources(patch: PatchRecord, grid: FineGrid | None, base: float, top: float,
                   cfg: SolverConfig) -> np.ndarray:
    """Source heights on a curved column ``[base, top]`` in the local frame.

    The top (boundary) point is always included. Lattice nodes closer than
    a thousandth of the lattice step to it are dropped.
    """
    if cfg.sampling == "uniform" or grid is None:
        return np.linspace(base, top, cfg.fe_y.m)
    step = grid.step[1 - patch.kind.straight_axis]
    lv = _lattice_levels(patch, grid, base, top)
    lv = lv[(lv >= base - 1e-12 * step) & (lv < top - 1e-3 * step)]
    nodes = np.append(lv, top)
    if nodes.size < cfg.n_min:
        nodes = _merge_uniform(nodes[:-1], base, top, cfg.n_min)
    return nodes


def refined_positions(patch: PatchRecord, cfg: SolverConfig) -> np.ndarray:
    """Refined output positions along the straight axis."""
    u0, u1 = patch.span
    return u0 + (u1 - u0) * cfg.refined(0)


def column_positions(patch: PatchRecord, cfg: SolverConfig) -> np.ndarray:
    """Straight-axis positions of the ``m_x`` sampled columns.

    They are every ``r``-th refined position, so boundary values computed
    for the output grid serve the columns too.
    """
    return refined_positions(patch, cfg)[:: cfg.refine]


def _check_heights(patch: PatchRecord, cols, tops, index: int = -1):
    base = patch.local_base
    for u, top in zip(cols, tops):
        if not top - base > 1e-10:
            raise NumericFailure(f"degenerate column at u={u:.17g} (height {top - base:.3g}) "
                                 f"in {_patch_label(patch, index)}")


def _pack(patch: PatchRecord, cols: np.ndarray, sources: list[np.ndarray]):
    # Physical sample points of all columns and the padded gather table.
    sizes = np.array([s.size for s in sources])
    width = int(sizes.max())
    x, y = patch.to_physical(np.repeat(cols, sizes), np.concatenate(sources))
    total = int(sizes.sum())
    gather = np.full((len(sources), width), total, dtype=np.int64)
    start = 0
    for k, n in enumerate(sizes):
        gather[k, :n] = np.arange(start, start + n)
        start += n
    return np.column_stack([x, y]), gather


def _normalized(heights: np.ndarray, base: float, top: float, p: Fe1dParams) -> np.ndarray:
    tau = (heights - base) / (top - base) * p.length
    tau[0] = max(tau[0], 0.0)
    tau[-1] = min(tau[-1], p.length)
    return tau


def curved_column_maps(patch: PatchRecord, cols: np.ndarray, tops: np.ndarray, cfg: SolverConfig,
                       grid: FineGrid | None, index: int = -1):
    """Sample points, gather table and column maps of a curved patch.

    The maps are ``None`` in uniform sampling mode, where the sources are
    the reference heights themselves.
    """
    _check_heights(patch, cols, tops, index)
    base = patch.local_base
    sources = [column_sources(patch, grid, base, float(t), cfg) for t in tops]
    samples, gather = _pack(patch, cols, sources)
    if cfg.sampling == "uniform" or grid is None:
        return samples, gather, None
    taus = [_normalized(h, base, float(t), cfg.fe_y) for h, t in zip(sources, tops)]
    try:
        maps = batched_transfer_matrices(taus, cfg.fe_y, cfg.op_y.nodes)
    except DegenerateSystemError as exc:
        raise NumericFailure(f"{exc} in {_patch_label(patch, index)}") from None
    return samples, gather, maps


def cover_column_maps(patch: PatchRecord, cols: np.ndarray, tops: np.ndarray, cover_tops: np.ndarray,
                      cfg: SolverConfig, grid: FineGrid | None, index: int = -1):
    """Sample points, gather table and completed column maps under a smooth cover.

    Samples stop at the true boundary. Each column's value at the cover
    height is a fixed linear combination of its samples (the one-unknown
    completion), which is folded into the column's transfer matrix.

    Raises
    ------
    CompletionImpossibleError, NoConstraintError
        When some column leaves the cover value unconstrained.
    """
    _check_heights(patch, cols, tops, index)
    base = patch.local_base
    p = cfg.fe_y
    sources, maps = [], []
    for top, ctop in zip(tops, cover_tops):
        if cfg.sampling == "uniform" or grid is None:
            known = np.linspace(base, top, max(cfg.n_min, p.m - 1))
        else:
            known = column_sources(patch, grid, base, float(top), cfg)
        tau = np.append((known - base) / (ctop - base), 1.0) * p.length
        op = build_custom_operator(tau, p)
        w = completion_weights(op)
        r = op.transfer_matrix(cfg.op_y.nodes)
        sources.append(known)
        maps.append(r[:, :-1] + np.outer(r[:, -1], w))
    samples, gather = _pack(patch, cols, sources)
    stacked = np.zeros((len(maps), p.m, gather.shape[1]), dtype=complex)
    for k, mk in enumerate(maps):
        stacked[k, :, : mk.shape[1]] = mk
    return samples, gather, stacked


# Prepare and apply --------------------------------------------------------------

def prepare_rect(patch: PatchRecord, cfg: SolverConfig, index: int = -1) -> PreparedPatch:
    if patch.kind is not PatchType.RECT:
        raise ValueError("prepare_rect needs a Rect patch")
    (x0, x1), (y0, y1) = patch.span, patch.extent
    gx, gy = np.meshgrid(x0 + (x1 - x0) * _unit(cfg.op_x), y0 + (y1 - y0) * _unit(cfg.op_y))
    return PreparedPatch(patch, index, "rect", np.column_stack([gx.ravel(), gy.ravel()]))


def prepare_curved(patch: PatchRecord, cfg: SolverConfig, grid: FineGrid | None = None,
                   index: int = -1) -> PreparedPatch:
    if not patch.is_curved:
        raise ValueError("prepare_curved needs a curved patch")
    tops = np.asarray(patch.local_boundary(refined_positions(patch, cfg)), dtype=float)
    cols = column_positions(patch, cfg)
    samples, gather, maps = curved_column_maps(patch, cols, tops[:: cfg.refine], cfg, grid, index)
    return PreparedPatch(patch, index, "curved", samples, gather, maps, tops)


def prepare_covered(patch: PatchRecord, cfg: SolverConfig, grid: FineGrid | None = None,
                    index: int = -1) -> PreparedPatch:
    """Covered preparation, falling back to the plain curved one if completion fails."""
    if patch.cover is None:
        raise ValueError("patch has no smooth cover")
    u = refined_positions(patch, cfg)
    tops = np.asarray(patch.local_boundary(u), dtype=float)
    cover_tops = np.asarray(patch.cover(u), dtype=float)
    cols = u[:: cfg.refine]
    try:
        samples, gather, maps = cover_column_maps(patch, cols, tops[:: cfg.refine],
                                                  cover_tops[:: cfg.refine], cfg, grid, index)
    except (CompletionImpossibleError, NoConstraintError) as exc:
        log.warning("cover completion failed for %s (%s); solving on the rough patch directly",
                    _patch_label(patch, index), exc)
        return prepare_curved(patch, cfg, grid, index)
    base = patch.local_base
    sv = cfg.refined(1)
    vv = base + sv[:, None] * (cover_tops - base)[None, :]
    scale = max(1.0, float(np.max(np.abs(vv))))
    mask = (vv <= tops[None, :] + 1e-12 * scale).ravel()
    return PreparedPatch(patch, index, "covered", samples, gather, maps, cover_tops, mask)


def prepare_patch(patch: PatchRecord, cfg: SolverConfig, grid: FineGrid | None = None,
                  index: int = -1) -> PreparedPatch:
    """Dispatch to the preparation matching the patch type and cover setting."""
    if patch.kind is PatchType.RECT:
        return prepare_rect(patch, cfg, index)
    if cfg.cover and patch.cover is not None:
        return prepare_covered(patch, cfg, grid, index)
    return prepare_curved(patch, cfg, grid, index)


def _column_data(vals: np.ndarray, prep: PreparedPatch, cfg: SolverConfig) -> np.ndarray:
    padded = np.append(vals, 0.0)[prep.gather]
    if prep.maps is None:
        return padded[:, : cfg.fe_y.m].T
    return np.matmul(prep.maps, padded[:, :, None])[:, :, 0].T


def output_points(prep: PreparedPatch, cfg: SolverConfig) -> np.ndarray:
    """Physical refined points of a prepared patch, row-major in ``(v, u)``."""
    patch = prep.patch
    su, sv = cfg.refined(0), cfg.refined(1)
    pts = np.empty((sv.size, su.size, 2))
    if prep.solver == "rect":
        (x0, x1), (y0, y1) = patch.span, patch.extent
        pts[:, :, 0] = x0 + (x1 - x0) * su
        pts[:, :, 1] = (y0 + (y1 - y0) * sv)[:, None]
        return pts.reshape(-1, 2)
    base = patch.local_base
    u = refined_positions(patch, cfg)
    axis = patch.kind.straight_axis
    pts[:, :, axis] = u
    # Transverse physical coordinate: sign * (base + eta * (top - base)).
    np.multiply.outer(sv, prep.tops - base, out=pts[:, :, 1 - axis])
    pts[:, :, 1 - axis] += base
    pts[:, :, 1 - axis] *= patch.kind.sign
    return pts.reshape(-1, 2)


def apply_prepared(f: Oracle, prep: PreparedPatch, cfg: SolverConfig) -> PatchOutput:
    """Sample ``f`` at the prepared points and evaluate the patch fit on the refined grid."""
    try:
        vals = _sample(f, prep.samples[:, 0], prep.samples[:, 1])
    except NumericFailure as exc:
        raise NumericFailure(f"{exc} in {_patch_label(prep.patch, prep.index)}") from None
    if prep.solver == "rect":
        data = vals.reshape(cfg.fe_y.m, cfg.fe_x.m)
    else:
        data = _column_data(vals, prep, cfg)
    out = cfg.out_y @ data @ cfg.out_x.T
    pts = output_points(prep, cfg)
    mask = np.ones(pts.shape[0], dtype=bool) if prep.mask is None else prep.mask
    return PatchOutput(pts, out.ravel(), mask, prep.index)


# One-call solvers ---------------------------------------------------------------

def solve_rect(f: Oracle, patch: PatchRecord, cfg: SolverConfig, index: int = -1) -> PatchOutput:
    """Tensor fit on a rectangle sampled at ``m x m`` equispaced nodes."""
    return apply_prepared(f, prepare_rect(patch, cfg, index), cfg)


def solve_curved(f: Oracle, patch: PatchRecord, cfg: SolverConfig, grid: FineGrid | None = None,
                 index: int = -1) -> PatchOutput:
    """Column transfer followed by a tensor fit on a one-side curved patch."""
    return apply_prepared(f, prepare_curved(patch, cfg, grid, index), cfg)


def solve_covered(f: Oracle, patch: PatchRecord, cfg: SolverConfig, grid: FineGrid | None = None,
                  index: int = -1) -> PatchOutput:
    """Solve on the smooth cover of a rough patch and keep the physical part.

    Falls back to :func:`solve_curved` when a column admits no completion.
    """
    return apply_prepared(f, prepare_covered(patch, cfg, grid, index), cfg)


def solve_patch(f: Oracle, patch: PatchRecord, cfg: SolverConfig, grid: FineGrid | None = None,
                index: int = -1) -> PatchOutput:
    """Dispatch to the solver matching the patch type and cover setting."""
    return apply_prepared(f, prepare_patch(patch, cfg, grid, index), cfg)


def transfer_column(f: Oracle, patch: PatchRecord, u: float, cfg: SolverConfig,
                    grid: FineGrid | None = None) -> np.ndarray:
    """Values of ``f`` at the ``m`` equispaced normalized heights of column ``u``."""
    cols = np.array([float(u)])
    tops = np.asarray(patch.local_boundary(cols), dtype=float)
    samples, gather, maps = curved_column_maps(patch, cols, tops, cfg, grid)
    prep = PreparedPatch(patch, -1, "curved", samples, gather, maps)
    return _column_data(_sample(f, samples[:, 0], samples[:, 1]), prep, cfg)[:, 0]


def complete_cover_column(f: Oracle, patch: PatchRecord, u: float, cfg: SolverConfig,
                          grid: FineGrid | None = None) -> np.ndarray:
    """Cover-column values at the ``m`` equispaced heights up to the cover."""
    cols = np.array([float(u)])
    tops = np.asarray(patch.local_boundary(cols), dtype=float)
    samples, gather, maps = cover_column_maps(patch, cols, tops, np.asarray(patch.cover(cols)),
                                              cfg, grid)
    prep = PreparedPatch(patch, -1, "covered", samples, gather, maps)
    return _column_data(_sample(f, samples[:, 0], samples[:, 1]), prep, cfg)[:, 0]


def standalone_grid(patch: PatchRecord, cfg: SolverConfig) -> FineGrid:
    """Lattice with the reference node spacing anchored at a patch's corner.

    Used when a curved patch is solved on its own rather than inside a
    background grid.
    """
    u0, u1 = patch.span
    step = (u1 - u0) / (cfg.fe_x.m - 1)
    phys_base = patch.base
    if patch.kind.straight_axis == 0:
        return FineGrid((u0, phys_base), (step, step))
    return FineGrid((phys_base, u0), (step, step))
