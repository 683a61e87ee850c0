import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from patchlfe.geometry import GridSpec, ParametricCurve, builtin_curve, circle, point_in_domain
from patchlfe.partition import (
    BOUNDARY,
    EXTERIOR,
    INTERIOR,
    classify_cells,
    coverage_gaps,
    scan_partition,
)
from patchlfe.patches import PatchRecord, PatchType, attach_cover, build_smooth_cover, subdivide

SMOOTH = builtin_curve("smooth-blob")


@pytest.fixture(scope="module")
def db20():
    return scan_partition(SMOOTH, GridSpec.square(20))


def square_curve(lo=0.2, hi=0.8, n=4000):
    def evaluate(t):
        s = np.mod(t, 2 * np.pi) / (2 * np.pi) * 4
        k = np.floor(s)
        f = s - k
        x = np.select([k == 0, k == 1, k == 2], [f, np.ones_like(f), 1 - f], np.zeros_like(f))
        y = np.select([k == 0, k == 1, k == 2], [np.zeros_like(f), f, np.ones_like(f)], 1 - f)
        return lo + (hi - lo) * x, lo + (hi - lo) * y

    return ParametricCurve(evaluate, n, "square")


def test_circle_cell_classes():
    cls = classify_cells(circle(0.5, 0.5, 0.3), GridSpec.square(4))
    assert set(cls[1:3, 1:3].ravel()) <= {INTERIOR, BOUNDARY}
    assert all(cls[i, j] == EXTERIOR for i in (0, 3) for j in (0, 3))


def test_fully_inside_and_outside_cells():
    cls = classify_cells(circle(0.5, 0.5, 0.45), GridSpec.square(10))
    assert cls[4, 4] == INTERIOR
    assert cls[0, 0] == EXTERIOR


def test_smooth_k5_counts():
    c = scan_partition(SMOOTH, GridSpec.square(5)).counts()
    assert abs(c["total"] - 14) <= 0.2 * 14
    assert c["Rect"] == 0


def test_smooth_k20_counts(db20):
    c = db20.counts()
    assert abs(c["total"] - 170) <= 0.15 * 170
    assert all(c[t.value] > 0 for t in PatchType)


def test_grid_aligned_square_gives_rect_cells_only():
    db = scan_partition(square_curve(), GridSpec.square(5))
    c = db.counts()
    assert c["Rect"] == c["total"] == 9
    assert coverage_gaps(db).size == 0


def test_order_boundary_first_then_rect(db20):
    kinds = [p.kind for p in db20]
    first_rect = kinds.index(PatchType.RECT)
    assert all(k is PatchType.RECT for k in kinds[first_rect:])
    assert all(k is not PatchType.RECT for k in kinds[:first_rect])


@pytest.mark.parametrize("K", [5, 10, 20])
def test_coverage(K):
    assert coverage_gaps(scan_partition(SMOOTH, GridSpec.square(K))).size == 0


def test_rect_purity(db20):
    s = np.linspace(0, 1, 7)
    for p in db20:
        if p.kind is PatchType.RECT:
            gx, gy = np.meshgrid(p.span[0] + s * (p.span[1] - p.span[0]),
                                 p.extent[0] + s * (p.extent[1] - p.extent[0]))
            assert point_in_domain(SMOOTH, np.stack([gx, gy], -1)).all()


def test_curved_sides_single_valued_within_bounds(db20):
    for p in db20:
        if p.is_curved:
            u = np.linspace(*p.span, 33)
            g = p.local_boundary(u)
            assert np.all(np.isfinite(g))
            assert np.all(g > p.local_base)


def test_growth_with_K():
    boundary, rect = [], []
    for K in (5, 10, 15, 20):
        c = scan_partition(SMOOTH, GridSpec.square(K)).counts()
        rect.append(c["Rect"])
        boundary.append(c["total"] - c["Rect"])
    assert boundary == sorted(boundary) and rect == sorted(rect)
    assert rect[-1] > boundary[-1]


def test_determinism():
    a = scan_partition(SMOOTH, GridSpec.square(10)).to_csv()
    b = scan_partition(builtin_curve("smooth-blob"), GridSpec.square(10)).to_csv()
    assert a == b


def test_csv_round_trip(db20):
    rows = db20.to_csv().strip().split("\n")
    assert rows[0] == "index,type,x_lo,x_hi,y_lo,y_hi,corner,cover_delta"
    assert len(rows) - 1 == len(db20)
    for row, p in zip(rows[1:], db20):
        fields = row.split(",")
        assert fields[1] == p.kind.value
        np.testing.assert_array_equal([float(v) for v in fields[2:6]], p.bounds())


def test_cover_mode_attaches_covers():
    db = scan_partition(SMOOTH, GridSpec.square(10), cover=True)
    for p in db:
        assert (p.cover is not None) == p.is_curved
        if p.cover is not None:
            assert p.cover.delta >= 1e-3 * np.sqrt(2) - 1e-15


# Patch records ------------------------------------------------------------------

def top_patch(lo=-1.0, hi=1.0, b=lambda x: 1 + 0.5 * x**2):
    return PatchRecord(PatchType.TOP, (lo, hi), 0.0, boundary=b)


def test_subdivide_ranges():
    left, right = subdivide(top_patch(), 0.0)
    assert left.span == (-1.0, 0.0) and right.span == (0.0, 1.0)
    assert left.kind is right.kind is PatchType.TOP
    assert (left.span[0], right.span[1]) == top_patch().span


def test_subdivide_rect():
    r = PatchRecord(PatchType.RECT, (0.0, 0.5), extent=(0.0, 1.0))
    a, b = subdivide(r, 0.25)
    assert a.span[1] - a.span[0] == b.span[1] - b.span[0]
    assert a.kind is b.kind is PatchType.RECT


@pytest.mark.parametrize("coord", [-1.0, 1.0, 2.0])
def test_subdivide_rejects_outside(coord):
    with pytest.raises(ValueError):
        subdivide(top_patch(), coord)


def test_patch_validation():
    with pytest.raises(ValueError):
        PatchRecord(PatchType.RECT, (0.0, 1.0))
    with pytest.raises(ValueError):
        PatchRecord(PatchType.LEFT, (0.0, 1.0))
    with pytest.raises(ValueError):
        PatchRecord(PatchType.TOP, (1.0, 1.0), boundary=np.cos)


@pytest.mark.parametrize("kind", [PatchType.TOP, PatchType.BOTTOM, PatchType.LEFT, PatchType.RIGHT])
def test_local_frame_round_trip(kind):
    p = PatchRecord(kind, (0.0, 1.0), 0.0, boundary=lambda u: kind.sign * (1 + 0 * u))
    x, y = p.to_physical(np.array([0.3]), np.array([0.6]))
    u, v = p.to_local(x, y)
    assert (u[0], v[0]) == pytest.approx((0.3, 0.6))
    assert p.contains(x, y)[0]


def test_cover_of_exact_cubic():
    cubic = lambda x: 1 + 0.1 * x - 0.2 * x**2 + 0.05 * x**3
    p = top_patch(b=cubic)
    u = np.linspace(-1, 1, 50)
    c = build_smooth_cover(p, u, cubic(u), 3, 1e-3)
    assert c.delta == pytest.approx(1e-3, abs=1e-9)
    assert np.max(np.abs(c(u) - (cubic(u) + 1e-3))) <= 1e-9


def test_cover_of_constant():
    p = top_patch(b=lambda x: 2 + 0 * x)
    u = np.linspace(-1, 1, 20)
    c = build_smooth_cover(p, u, np.full(20, 2.0), 3)
    assert np.max(np.abs(np.array(c.coeffs[1:]))) <= 1e-10


def test_cover_above_wiggly_boundary():
    b = lambda x: 1 + 0.1 * x**3 + 0.01 * np.sin(40 * x)
    u = np.linspace(-1, 1, 200)
    c = build_smooth_cover(top_patch(b=b), u, b(u), 3, 1e-3)
    assert np.all(c(u) >= b(u) + 1e-3 - 1e-15)


def test_cover_needs_enough_samples():
    with pytest.raises(ValueError):
        build_smooth_cover(top_patch(), [0.0, 0.1, 0.2, 0.3], [1, 1, 1, 1], 3)
    with pytest.raises(ValueError):
        attach_cover(PatchRecord(PatchType.RECT, (0.0, 1.0), extent=(0.0, 1.0)))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-0.05, 0.05), min_size=4, max_size=4), st.floats(1e-4, 1e-2),
       st.integers(1, 5))
def test_cover_envelope_property(coeffs, delta0, degree):
    b = lambda x: 1 + np.polynomial.polynomial.polyval(x, coeffs) + 0.01 * np.abs(np.sin(9 * x))
    p = attach_cover(top_patch(b=b), degree, delta0)
    u = np.linspace(-1, 1, 401)
    assert np.all(p.cover(u) >= b(u) + delta0 - 1e-12)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.35, 0.65), st.floats(0.35, 0.65), st.floats(0.18, 0.3), st.integers(6, 14))
def test_circle_coverage_property(cx, cy, r, K):
    db = scan_partition(circle(cx, cy, r, 2048), GridSpec.square(K))
    assert coverage_gaps(db, spacing=1 / (6 * K)).size == 0
