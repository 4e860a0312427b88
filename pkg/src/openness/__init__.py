"""Spatial openness of dwellings from segmentation masks.

2D openness comes from grid visibility graph analysis of floor-plan masks,
3D openness from element pixel ratios of interior-photo masks.
"""
from .grid import OccupancyGrid, ScaleCalibration, build_grid, calibrate
from .interior import ElementRatios, aggregate_property_ratios, element_ratios
from .masks import ClassMask, PixelOccupancy, binarize_floorplan, parse_ascii, parse_class_mask
from .vga import (
    Openness2DSummary,
    VisibilityField,
    line_of_sight,
    render_heatmap,
    summarize,
    visibility_counts,
)

__all__ = [
    "ClassMask", "ElementRatios", "OccupancyGrid", "Openness2DSummary", "PixelOccupancy",
    "ScaleCalibration", "VisibilityField", "aggregate_property_ratios", "binarize_floorplan",
    "build_grid", "calibrate", "element_ratios", "line_of_sight", "parse_ascii",
    "parse_class_mask", "render_heatmap", "summarize", "visibility_counts",
]
