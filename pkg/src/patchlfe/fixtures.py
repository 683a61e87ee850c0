"""Single-patch test geometries for the subdivision and smooth-cover studies.

Both fixtures are Top patches over ``[-1, 1]`` with base ``y = 0`` and are
sampled on the lattice of spacing ``1/24`` anchored at ``(-1, 0)``.
"""

from __future__ import annotations

import numpy as np

from .patches import PatchRecord, PatchType, attach_cover, subdivide
from .solvers import FineGrid, SolverConfig, solve_covered, solve_curved

FIXTURE_LATTICE = FineGrid((-1.0, 0.0), (1.0 / 24, 1.0 / 24))

# Small-scale perturbation of the rough fixture: amplitude and wavenumber.
ROUGH_AMPLITUDE = 0.01
ROUGH_WAVENUMBER = 25.0


def smooth_top(x):
    """Curved side ``1 + x^2/2 + 0.2 cos(pi x + 0.3)``."""
    x = np.asarray(x, dtype=float)
    return 1.0 + 0.5 * x**2 + 0.2 * np.cos(np.pi * x + 0.30)


def rough_top(x):
    """Smooth side plus ``0.01 sgn(s)|s|^1.2`` with ``s = sin(25 x + 0.3)``."""
    s = np.sin(ROUGH_WAVENUMBER * np.asarray(x, dtype=float) + 0.3)
    return smooth_top(x) + ROUGH_AMPLITUDE * np.sign(s) * np.abs(s) ** 1.2


def smooth_patch() -> PatchRecord:
    return PatchRecord(PatchType.TOP, (-1.0, 1.0), 0.0, boundary=smooth_top)


def rough_patch() -> PatchRecord:
    return PatchRecord(PatchType.TOP, (-1.0, 1.0), 0.0, boundary=rough_top)


def _max_error(f, out) -> float:
    m = out.mask
    return float(np.max(np.abs(out.values[m] - f(out.points[m, 0], out.points[m, 1]))))


def subdivision_errors(f, cfg: SolverConfig | None = None) -> tuple[float, float]:
    """Max errors of the smooth fixture as one patch and split at ``x = 0``."""
    cfg = cfg or SolverConfig()
    p = smooth_patch()
    one = _max_error(f, solve_curved(f, p, cfg, FIXTURE_LATTICE))
    two = max(_max_error(f, solve_curved(f, q, cfg, FIXTURE_LATTICE)) for q in subdivide(p, 0.0))
    return one, two


def cover_errors(f, cfg: SolverConfig | None = None, degree: int = 3,
                 delta0: float = 1e-3) -> tuple[float, float, float]:
    """Max errors of the rough fixture: direct, one global cover, two local covers."""
    cfg = cfg or SolverConfig(cover=True)
    p = rough_patch()
    direct = _max_error(f, solve_curved(f, p, cfg, FIXTURE_LATTICE))
    one = _max_error(f, solve_covered(f, attach_cover(p, degree, delta0), cfg, FIXTURE_LATTICE))
    two = max(_max_error(f, solve_covered(f, attach_cover(q, degree, delta0), cfg, FIXTURE_LATTICE))
              for q in subdivide(p, 0.0))
    return direct, one, two
