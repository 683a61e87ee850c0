"""File emission: CSV tables, plain-text grayscale pixmaps and run summaries."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .assembly import ErrorReport, PointCloud
from .partition import PatchDatabase
from .patches import PatchType

PIXMAP_SIZE = 512
ERROR_FLOOR = -16.0

# Gray levels of the patch map; exterior pixels stay black.
TYPE_LEVELS = {
    PatchType.RECT: 230,
    PatchType.LEFT: 60,
    PatchType.RIGHT: 100,
    PatchType.TOP: 140,
    PatchType.BOTTOM: 180,
}


def write_text(path: Path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8", newline="\n")


def cloud_csv(path: Path, cloud: PointCloud, errors: np.ndarray, chunk: int = 200_000) -> None:
    """Cloud dump with 17 significant digits: x, y, value_re, value_im, abs_error, patch_index."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("x,y,value_re,value_im,abs_error,patch_index\n")
        for start in range(0, len(cloud), chunk):
            sl = slice(start, start + chunk)
            block = np.column_stack([cloud.points[sl], cloud.values[sl].real, cloud.values[sl].imag,
                                     errors[sl]])
            rows = ["%.17g,%.17g,%.17g,%.17g,%.17g" % tuple(r) for r in block]
            fh.write("".join(f"{r},{int(i)}\n" for r, i in zip(rows, cloud.patch[sl])))


def pgm_text(image: np.ndarray, maxval: int = 255) -> str:
    """Plain (P2) grayscale pixmap; row 0 of ``image`` is the top of the picture."""
    img = np.asarray(image, dtype=np.int64)
    if img.ndim != 2 or img.min(initial=0) < 0 or img.max(initial=0) > maxval:
        raise ValueError("image must be 2-D with levels in [0, maxval]")
    h, w = img.shape
    lines = [f"P2\n{w} {h}\n{maxval}"]
    per_line = 16
    for row in img:
        for k in range(0, w, per_line):
            lines.append(" ".join(str(v) for v in row[k:k + per_line]))
    return "\n".join(lines) + "\n"


def _pixel_centres(box, size: int):
    a, b, c, d = box
    xs = a + (np.arange(size) + 0.5) * (b - a) / size
    ys = d - (np.arange(size) + 0.5) * (d - c) / size
    return xs, ys


def patch_map(db: PatchDatabase, size: int = PIXMAP_SIZE) -> np.ndarray:
    """Pixel image of the first patch containing each pixel centre, coded by type."""
    xs, ys = _pixel_centres(db.grid.box, size)
    gx, gy = np.meshgrid(xs, ys)
    img = np.zeros(gx.shape, dtype=np.int64)
    free = np.ones(gx.shape, dtype=bool)
    for p in db.patches:
        x0, x1, y0, y1 = p.bounds()
        box = free & (gx >= x0) & (gx <= x1) & (gy >= y0) & (gy <= y1)
        if not box.any():
            continue
        hit = np.zeros_like(box)
        hit[box] = p.contains(gx[box], gy[box])
        img[hit] = TYPE_LEVELS[p.kind]
        free &= ~hit
    return img


def error_heatmap(cloud: PointCloud, errors: np.ndarray, box, size: int = PIXMAP_SIZE) -> np.ndarray:
    """Pixel image of ``clip(log10(error), -16, 0)``, the worst error per pixel.

    Gray level 1 is an error of 1e-16 or less and 255 an error of 1 or more;
    pixels without cloud points are 0.
    """
    a, b, c, d = box
    img = np.full((size, size), -np.inf)
    if len(cloud):
        col = np.clip(((cloud.points[:, 0] - a) / (b - a) * size).astype(np.int64), 0, size - 1)
        row = np.clip(((d - cloud.points[:, 1]) / (d - c) * size).astype(np.int64), 0, size - 1)
        with np.errstate(divide="ignore"):
            level = np.clip(np.log10(errors), ERROR_FLOOR, 0.0)
        np.maximum.at(img, (row, col), level)
    out = np.zeros((size, size), dtype=np.int64)
    seen = np.isfinite(img)
    out[seen] = 1 + np.rint((img[seen] - ERROR_FLOOR) / -ERROR_FLOOR * 254).astype(np.int64)
    return out


def type_table(K: int, patches: int, report: ErrorReport) -> str:
    """One-row table of per-type maximum and mean patch errors, ``--`` for absent types."""
    head = ["K", "N_p"]
    row = [str(K), str(patches)]
    for t in PatchType:
        head += [f"{t.value}_max", f"{t.value}_avg"]
        if report.type_count.get(t.value):
            row += [f"{report.type_max[t.value]:.3e}", f"{report.type_mean[t.value]:.3e}"]
        else:
            row += ["--", "--"]
    return ",".join(head) + "\n" + ",".join(row) + "\n"
