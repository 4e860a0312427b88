"""Grid visibility graph: exact supercover line of sight, per-node counts,
summary statistics and heatmaps.

Cell centres sit at half-integer coordinates, so every decision in the
line walk is made on small integers; there is no floating point anywhere
in the visibility computation.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numba
import numpy as np
from PIL import Image

from .grid import OccupancyGrid

Cell = Union[int, tuple]

HEATMAP_LOW = 64
HEATMAP_HIGH = 255


@numba.njit(cache=True, nogil=True)
def _walk_clear(blocked, x0, y0, x1, y1):
    """True when the supercover of the centre-to-centre segment avoids blocked cells."""
    nx = abs(x1 - x0)
    ny = abs(y1 - y0)
    sx = 1 if x1 > x0 else -1
    sy = 1 if y1 > y0 else -1
    x = x0
    y = y0
    ix = 0
    iy = 0
    while ix < nx or iy < ny:
        decision = (1 + 2 * ix) * ny - (1 + 2 * iy) * nx
        if decision == 0:
            # exact pass through a lattice corner: all four cells touch it
            if blocked[y, x + sx] or blocked[y + sy, x]:
                return False
            x += sx
            y += sy
            ix += 1
            iy += 1
        elif decision < 0:
            x += sx
            ix += 1
        else:
            y += sy
            iy += 1
        if blocked[y, x]:
            return False
    return True


@numba.njit(cache=True, nogil=True)
def _walk_clear_skipping(blocked, clearance, x0, y0, x1, y1):
    """Same walk as ``_walk_clear`` but jumps across known-clear squares.

    ``clearance[y, x]`` is the chessboard distance to the nearest blocked
    cell, so every cell within ``r - 1`` of the current one is clear. The
    walk advances ``a = r - 2`` steps along its dominant axis in one go; in
    that stretch it moves at most ``a + 1`` along the other axis, so every
    skipped cell (including corner side cells) lies inside the clear square.
    The landing state is the first walk cell of the new column (or row),
    found by counting minor-axis crossings in integer arithmetic.
    """
    nx = abs(x1 - x0)
    ny = abs(y1 - y0)
    sx = 1 if x1 > x0 else -1
    sy = 1 if y1 > y0 else -1
    x = x0
    y = y0
    ix = 0
    iy = 0
    while ix < nx or iy < ny:
        a = clearance[y, x] - 2
        if a >= 1:
            if nx >= ny:
                jx = ix + a
                if jx >= nx:
                    return True
                jy = ((2 * jx - 1) * ny - nx) // (2 * nx) + 1
                if jy < 0:
                    jy = 0
                elif jy > ny:
                    jy = ny
            else:
                jy = iy + a
                if jy >= ny:
                    return True
                jx = ((2 * jy - 1) * nx - ny) // (2 * ny) + 1
                if jx < 0:
                    jx = 0
                elif jx > nx:
                    jx = nx
            ix = jx
            iy = jy
            x = x0 + sx * ix
            y = y0 + sy * iy
            continue
        decision = (1 + 2 * ix) * ny - (1 + 2 * iy) * nx
        if decision == 0:
            if blocked[y, x + sx] or blocked[y + sy, x]:
                return False
            x += sx
            y += sy
            ix += 1
            iy += 1
        elif decision < 0:
            x += sx
            ix += 1
        else:
            y += sy
            iy += 1
        if blocked[y, x]:
            return False
    return True


@numba.njit(cache=True, nogil=True)
def _chessboard_clearance(blocked):
    rows, cols = blocked.shape
    big = rows + cols + 2
    d = np.empty((rows, cols), dtype=np.int64)
    for y in range(rows):
        for x in range(cols):
            d[y, x] = 0 if blocked[y, x] else big
    for y in range(rows):
        for x in range(cols):
            v = d[y, x]
            if x > 0:
                v = min(v, d[y, x - 1] + 1)
            if y > 0:
                v = min(v, d[y - 1, x] + 1)
                if x > 0:
                    v = min(v, d[y - 1, x - 1] + 1)
                if x + 1 < cols:
                    v = min(v, d[y - 1, x + 1] + 1)
            d[y, x] = v
    for y in range(rows - 1, -1, -1):
        for x in range(cols - 1, -1, -1):
            v = d[y, x]
            if x + 1 < cols:
                v = min(v, d[y, x + 1] + 1)
            if y + 1 < rows:
                v = min(v, d[y + 1, x] + 1)
                if x + 1 < cols:
                    v = min(v, d[y + 1, x + 1] + 1)
                if x > 0:
                    v = min(v, d[y + 1, x - 1] + 1)
            d[y, x] = v
    return d


@numba.njit(cache=True, nogil=True)
def _box_clear(prefix, x0, y0, x1, y1):
    xa = min(x0, x1)
    xb = max(x0, x1) + 1
    ya = min(y0, y1)
    yb = max(y0, y1) + 1
    return prefix[yb, xb] - prefix[ya, xb] - prefix[yb, xa] + prefix[ya, xa] == 0


@numba.njit(cache=True, nogil=True)
def _los(blocked, prefix, clearance, x0, y0, x1, y1):
    # the supercover never leaves the cell bounding box of the endpoints
    if _box_clear(prefix, x0, y0, x1, y1):
        return True
    return _walk_clear_skipping(blocked, clearance, x0, y0, x1, y1)


@numba.njit(cache=True, nogil=True)
def _count_stride(blocked, prefix, clearance, xs, ys, start, stride, out):
    n = xs.shape[0]
    for i in range(start, n, stride):
        xi = xs[i]
        yi = ys[i]
        for j in range(i + 1, n):
            if _los(blocked, prefix, clearance, xi, yi, xs[j], ys[j]):
                out[i] += 1
                out[j] += 1


def _blocked_prefix(blocked: np.ndarray) -> np.ndarray:
    prefix = np.zeros((blocked.shape[0] + 1, blocked.shape[1] + 1), dtype=np.int64)
    prefix[1:, 1:] = np.cumsum(np.cumsum(blocked, axis=0, dtype=np.int64), axis=1)
    return prefix


def _resolve(grid: OccupancyGrid, cell: Cell, cells: Optional[np.ndarray] = None) -> tuple[int, int]:
    if isinstance(cell, (int, np.integer)):
        if cells is None:
            cells = grid.node_cells()
        if not 0 <= cell < len(cells):
            raise IndexError(f"node index {cell} out of range (N={len(cells)})")
        x, y = cells[cell]
        return int(x), int(y)
    x, y = (int(v) for v in cell)
    if not (0 <= x < grid.cols and 0 <= y < grid.rows) or not grid.node[y, x]:
        raise ValueError(f"cell (x={x}, y={y}) is not a node")
    return x, y


def line_of_sight(grid: OccupancyGrid, p: Cell, q: Cell) -> bool:
    """Whether nodes ``p`` and ``q`` see each other.

    ``p`` and ``q`` are either node indices (row-major node order) or
    ``(x, y)`` cell coordinates. The segment between cell centres must not
    touch the closed square of any blocked cell; passing exactly through a
    corner tests all four cells sharing it.
    """
    cells = grid.node_cells()
    x0, y0 = _resolve(grid, p, cells)
    x1, y1 = _resolve(grid, q, cells)
    blocked = np.ascontiguousarray(grid.blocked)
    return bool(_walk_clear(blocked, x0, y0, x1, y1))


@dataclass(frozen=True, eq=False)
class VisibilityField:
    grid: OccupancyGrid
    counts: np.ndarray  # int64, one per node in row-major order, self excluded

    @property
    def node_count(self) -> int:
        return int(self.counts.shape[0])

    def count_raster(self, fill: int = -1) -> np.ndarray:
        """Counts placed back on the grid; non-node cells get ``fill``."""
        out = np.full(self.grid.blocked.shape, fill, dtype=np.int64)
        out[self.grid.node] = self.counts
        return out


def visibility_counts(grid: OccupancyGrid, workers: int = 1) -> VisibilityField:
    """Count, for every node, how many other nodes are in line of sight.

    Each unordered pair is tested once. With ``workers > 1`` sources are
    dealt round-robin to threads (the kernel releases the GIL); partial
    integer counts are summed, so the result does not depend on ``workers``.
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if grid.node_count < 1:
        raise ValueError("grid has no nodes")
    cells = grid.node_cells()
    xs = np.ascontiguousarray(cells[:, 0], dtype=np.int64)
    ys = np.ascontiguousarray(cells[:, 1], dtype=np.int64)
    blocked = np.ascontiguousarray(grid.blocked)
    prefix = _blocked_prefix(blocked)
    clearance = _chessboard_clearance(blocked)
    n = len(xs)
    workers = min(workers, max(1, n))
    if workers == 1:
        counts = np.zeros(n, dtype=np.int64)
        _count_stride(blocked, prefix, clearance, xs, ys, 0, 1, counts)
    else:
        partial = np.zeros((workers, n), dtype=np.int64)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_count_stride, blocked, prefix, clearance, xs, ys, k, workers, partial[k])
                for k in range(workers)
            ]
            for f in futures:
                f.result()
        counts = partial.sum(axis=0)
    counts.setflags(write=False)
    return VisibilityField(grid, counts)


@dataclass(frozen=True)
class Openness2DSummary:
    node_count: int
    mean_visibility: float
    std_visibility: float
    min_visibility: int
    median_visibility: int
    max_visibility: int
    mean_relative: Optional[float]


def summarize(field: VisibilityField) -> Openness2DSummary:
    """Summary statistics of a visibility field.

    Sums are taken in exact integer arithmetic, so the mean and the
    population standard deviation are reproducible to the last bit. For
    even N the median is the lower of the two middle values. The relative
    mean (mean / (N - 1)) is ``None`` for a single-node field.
    """
    n = field.node_count
    if n == 0:
        raise ValueError("empty visibility field")
    values = [int(v) for v in field.counts]
    total = sum(values)
    total_sq = sum(v * v for v in values)
    mean = total / n
    # n^2 var = n*sum(c^2) - (sum c)^2, exact in integers
    var_num = n * total_sq - total * total
    std = math.sqrt(var_num) / n
    ordered = sorted(values)
    rel = total / (n * (n - 1)) if n > 1 else None
    return Openness2DSummary(
        node_count=n,
        mean_visibility=mean,
        std_visibility=std,
        min_visibility=ordered[0],
        median_visibility=ordered[(n - 1) // 2],
        max_visibility=ordered[-1],
        mean_relative=rel,
    )


def render_heatmap(field: VisibilityField) -> np.ndarray:
    """8-bit grayscale raster, one pixel per grid cell.

    Blocked cells are black, outside cells white, and nodes follow a linear
    ramp from 64 (lowest count) to 255 (highest); a uniform field is all 255.
    """
    grid = field.grid
    img = np.full(grid.blocked.shape, 255, dtype=np.uint8)
    img[grid.blocked] = 0
    if field.node_count:
        c = field.counts.astype(np.int64)
        lo, hi = int(c.min()), int(c.max())
        if hi == lo:
            shades = np.full(c.shape, HEATMAP_HIGH, dtype=np.int64)
        else:
            span = hi - lo
            step = HEATMAP_HIGH - HEATMAP_LOW
            # integer round-half-up of lo + (c - lo) * step / span
            shades = HEATMAP_LOW + (2 * (c - lo) * step + span) // (2 * span)
        img[grid.node] = shades.astype(np.uint8)
    return img


def save_heatmap(image: np.ndarray, path: Union[str, Path]) -> None:
    Image.fromarray(np.ascontiguousarray(image, dtype=np.uint8), mode="L").save(
        path, format="PNG", optimize=False
    )
