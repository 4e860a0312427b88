"""Scale calibration and the uniform analysis lattice laid over a plan raster."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .masks import PixelOccupancy, PixelState

DEFAULT_INTERVAL_M = 0.20


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class ScaleCalibration:
    meters_per_pixel: float
    floor_area_m2: float
    interior_pixel_count: int


def calibrate(occ: PixelOccupancy, floor_area_m2: float) -> ScaleCalibration:
    """Derive metres per pixel so that the open pixels cover the stated floor area."""
    if not floor_area_m2 > 0 or not math.isfinite(floor_area_m2):
        raise GridError(f"floor area must be positive and finite, got {floor_area_m2}")
    n = occ.interior_pixel_count
    if n <= 0:
        raise GridError("cannot calibrate a plan with zero interior pixels")
    mpp = math.sqrt(floor_area_m2 / n)
    return ScaleCalibration(mpp, float(floor_area_m2), n)


@dataclass(frozen=True, eq=False)
class OccupancyGrid:
    """Cell lattice with a blocked flag and a node (traversable) flag per cell.

    Arrays are indexed ``[row, col]``; cells are addressed as ``(x, y)`` =
    ``(col, row)`` elsewhere in the package.
    """

    blocked: np.ndarray
    node: np.ndarray
    cell_size_m: float = DEFAULT_INTERVAL_M

    def __post_init__(self):
        blocked = np.array(self.blocked, dtype=bool)
        node = np.array(self.node, dtype=bool)
        if blocked.shape != node.shape or blocked.ndim != 2:
            raise GridError("blocked and node must be 2D arrays of equal shape")
        if (blocked & node).any():
            raise GridError("a cell cannot be both blocked and a node")
        if not self.cell_size_m > 0:
            raise GridError("cell size must be positive")
        blocked.setflags(write=False)
        node.setflags(write=False)
        object.__setattr__(self, "blocked", blocked)
        object.__setattr__(self, "node", node)

    @property
    def rows(self) -> int:
        return self.blocked.shape[0]

    @property
    def cols(self) -> int:
        return self.blocked.shape[1]

    @property
    def node_count(self) -> int:
        return int(np.count_nonzero(self.node))

    def node_cells(self) -> np.ndarray:
        """(N, 2) array of node ``(x, y)`` in row-major order."""
        ys, xs = np.nonzero(self.node)
        return np.stack([xs, ys], axis=1)

    def to_ascii(self) -> str:
        out = np.full(self.blocked.shape, " ", dtype="<U1")
        out[self.node] = "."
        out[self.blocked] = "#"
        return "\n".join("".join(r) for r in out) + "\n"

    @classmethod
    def from_ascii(cls, text: str, cell_size_m: float = DEFAULT_INTERVAL_M) -> "OccupancyGrid":
        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        width = len(lines[0]) if lines else 0
        if width == 0 or any(len(line) != width for line in lines):
            raise GridError("ASCII grid must be non-empty with equal-length lines")
        arr = np.array([list(line) for line in lines])
        if not np.isin(arr, ["#", ".", " "]).all():
            raise GridError("ASCII grid glyphs are '#', '.' and ' '")
        return cls(arr == "#", arr == ".", cell_size_m)

    def __eq__(self, other):
        if not isinstance(other, OccupancyGrid):
            return NotImplemented
        return (
            self.cell_size_m == other.cell_size_m
            and np.array_equal(self.blocked, other.blocked)
            and np.array_equal(self.node, other.node)
        )


def _cell_index(n_pixels: int, pixels_per_cell: float) -> np.ndarray:
    centers = np.arange(n_pixels, dtype=np.float64) + 0.5
    return np.floor(centers / pixels_per_cell).astype(np.int64)


def build_grid(
    occ: PixelOccupancy,
    cal: ScaleCalibration,
    interval_m: float = DEFAULT_INTERVAL_M,
) -> OccupancyGrid:
    """Overlay a lattice of ``interval_m`` cells on the pixel raster.

    A cell's footprint is the set of pixels whose centres fall inside it.
    Any blocked pixel blocks the cell; an unblocked cell becomes a node when
    at least half of its footprint is open.
    """
    if not interval_m > 0:
        raise GridError(f"grid interval must be positive, got {interval_m}")
    if interval_m < cal.meters_per_pixel:
        warnings.warn(
            f"grid interval {interval_m} m is finer than one pixel "
            f"({cal.meters_per_pixel:.4g} m); some cells will have empty footprints",
            stacklevel=2,
        )
    ppc = interval_m / cal.meters_per_pixel
    cx = _cell_index(occ.width, ppc)
    cy = _cell_index(occ.height, ppc)
    cols = int(cx[-1]) + 1
    rows = int(cy[-1]) + 1
    cell_id = (cy[:, None] * cols + cx[None, :]).ravel()
    state = occ.state.ravel()
    ncell = rows * cols
    total = np.bincount(cell_id, minlength=ncell)
    n_blocked = np.bincount(cell_id, weights=state == PixelState.BLOCKED, minlength=ncell)
    n_open = np.bincount(cell_id, weights=state == PixelState.OPEN, minlength=ncell)
    blocked = n_blocked > 0
    # 2*open >= total is the >=50% rule without float division
    node = ~blocked & (n_open > 0) & (2 * n_open >= total)
    grid = OccupancyGrid(blocked.reshape(rows, cols), node.reshape(rows, cols), float(interval_m))
    if grid.node_count == 0:
        raise GridError("zero node cells: the grid has no traversable interior")
    return grid
