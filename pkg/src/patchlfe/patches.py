"""Patch records and the local frame that reduces every curved patch to a Top patch.

A curved patch has one straight axis ``u`` and one transverse axis ``v``.
In the local frame the patch is ``{u_lo <= u <= u_hi, v_base <= v <= g(u)}``
with the curved side on top. The four boundary types map to this frame as

========  ======  =======
type      u       v
========  ======  =======
Top       x       y
Bottom    x       -y
Right     y       x
Left      y       -x
========  ======  =======
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np


class PatchType(str, enum.Enum):
    RECT = "Rect"
    LEFT = "Left"
    RIGHT = "Right"
    TOP = "Top"
    BOTTOM = "Bottom"

    @property
    def straight_axis(self) -> int:
        """Physical axis along which the curved side is a graph (0 for x, 1 for y)."""
        return 0 if self in (PatchType.TOP, PatchType.BOTTOM) else 1

    @property
    def sign(self) -> float:
        """+1 when the interior lies below (Top) or left (Right) of the curved side."""
        return 1.0 if self in (PatchType.TOP, PatchType.RIGHT) else -1.0


CURVED_TYPES = (PatchType.LEFT, PatchType.RIGHT, PatchType.TOP, PatchType.BOTTOM)


@dataclass(frozen=True)
class SmoothCover:
    """Polynomial upper envelope ``p(u) + delta`` of a curved side in the local frame.

    ``coeffs`` are in :func:`numpy.polynomial.polynomial.polyval` order and
    act on the centred coordinate ``(u - center) / scale``.
    """

    coeffs: tuple[float, ...]
    delta: float
    center: float
    scale: float

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, u) -> np.ndarray:
        s = (np.asarray(u, dtype=float) - self.center) / self.scale
        return np.polynomial.polynomial.polyval(s, self.coeffs) + self.delta


@dataclass(frozen=True)
class PatchRecord:
    """One computational patch.

    For a Rect patch ``span`` is the ``x`` range and ``extent`` the ``y``
    range. For a curved patch ``span`` is the range of the straight axis,
    ``base`` the physical coordinate of the straight side opposite the
    curve, and ``boundary`` the physical curved side as a function of the
    straight-axis coordinate.
    """

    kind: PatchType
    span: tuple[float, float]
    base: float = 0.0
    extent: tuple[float, float] | None = None
    boundary: Callable[[np.ndarray], np.ndarray] | None = field(default=None, compare=False, repr=False)
    cells: tuple[tuple[int, int], ...] = ()
    corner: bool = False
    t_range: tuple[float, float] | None = None
    cover: SmoothCover | None = None

    def __post_init__(self):
        if not self.span[0] < self.span[1]:
            raise ValueError(f"empty span {self.span}")
        if self.kind is PatchType.RECT:
            if self.extent is None or not self.extent[0] < self.extent[1]:
                raise ValueError("a Rect patch needs a nonempty extent")
        elif self.boundary is None:
            raise ValueError(f"a {self.kind.value} patch needs a boundary function")

    @property
    def is_curved(self) -> bool:
        return self.kind is not PatchType.RECT

    # Local frame -----------------------------------------------------------------
    def local_boundary(self, u) -> np.ndarray:
        """Curved side ``g(u)`` in the local frame."""
        return self.kind.sign * np.asarray(self.boundary(np.asarray(u, dtype=float)), dtype=float)

    @property
    def local_base(self) -> float:
        return self.kind.sign * self.base

    def to_physical(self, u, v) -> tuple[np.ndarray, np.ndarray]:
        u = np.asarray(u, dtype=float)
        w = self.kind.sign * np.asarray(v, dtype=float)
        if self.kind.straight_axis == 0:
            return u, w
        return w, u

    def to_local(self, x, y) -> tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.kind.straight_axis == 0:
            return x, self.kind.sign * y
        return y, self.kind.sign * x

    def bounds(self, samples: int = 65) -> tuple[float, float, float, float]:
        """Physical bounding box ``(x_lo, x_hi, y_lo, y_hi)``."""
        if self.kind is PatchType.RECT:
            return (*self.span, *self.extent)
        u = np.linspace(*self.span, samples)
        g = self.boundary(u)
        lo = min(self.base, float(np.min(g)))
        hi = max(self.base, float(np.max(g)))
        if self.kind.straight_axis == 0:
            return self.span[0], self.span[1], lo, hi
        return lo, hi, self.span[0], self.span[1]

    def contains(self, x, y, tol: float = 1e-12) -> np.ndarray:
        """Whether physical points lie in the closed patch."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.kind is PatchType.RECT:
            return ((x >= self.span[0] - tol) & (x <= self.span[1] + tol)
                    & (y >= self.extent[0] - tol) & (y <= self.extent[1] + tol))
        u, v = self.to_local(x, y)
        inside = (u >= self.span[0] - tol) & (u <= self.span[1] + tol) & (v >= self.local_base - tol)
        out = np.zeros(u.shape, dtype=bool)
        if inside.any():
            uc = np.clip(u[inside], *self.span)
            out[inside] = v[inside] <= self.local_boundary(uc) + tol
        return out


def subdivide(patch: PatchRecord, coord: float) -> tuple[PatchRecord, PatchRecord]:
    """Split a patch across its straight axis (the ``x`` axis for a Rect)."""
    lo, hi = patch.span
    if not lo < coord < hi:
        raise ValueError(f"split coordinate {coord} outside the open range ({lo}, {hi})")
    return (replace(patch, span=(lo, coord), cover=None),
            replace(patch, span=(coord, hi), cover=None))


def build_smooth_cover(patch: PatchRecord, samples_u, samples_g, degree: int = 3,
                       delta0: float = 1e-3) -> SmoothCover:
    """Polynomial envelope staying at least ``delta0`` above the sampled curved side.

    ``samples_g`` are curved-side values in the local frame, so the envelope
    lies on the exterior side of the boundary for every patch type.
    """
    u = np.asarray(samples_u, dtype=float)
    g = np.asarray(samples_g, dtype=float)
    if u.size < degree + 2:
        raise ValueError(f"need at least {degree + 2} samples for a degree-{degree} cover")
    center = 0.5 * (patch.span[0] + patch.span[1])
    scale = 0.5 * (patch.span[1] - patch.span[0])
    s = (u - center) / scale
    vander = np.polynomial.polynomial.polyvander(s, degree)
    coeffs, _, rank, _ = np.linalg.lstsq(vander, g, rcond=None)
    if rank < degree + 1:
        raise ValueError("cover fit is rank deficient; samples do not span the patch")
    fit = vander @ coeffs
    delta = float(np.max(g - fit)) + delta0
    return SmoothCover(tuple(float(c) for c in coeffs), delta, center, scale)


def attach_cover(patch: PatchRecord, degree: int = 3, delta0: float = 1e-3,
                 samples: int = 401) -> PatchRecord:
    """Copy of ``patch`` carrying a smooth cover fitted to dense curved-side samples."""
    if not patch.is_curved:
        raise ValueError("only curved patches take a smooth cover")
    u = np.linspace(*patch.span, samples)
    cover = build_smooth_cover(patch, u, patch.local_boundary(u), degree, delta0)
    return replace(patch, cover=cover)
