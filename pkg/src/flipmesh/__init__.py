"""Diagonal-switch Delaunay triangulations of point clouds on surfaces."""

from .errors import FlipMeshError
from .flipper import FlipConfig, RunReport, RunStatus, Strategy, delaunayify, global_schedule, local_delaunayify
from .mesh import SurfaceMesh, flip, load_off, parse_off, save_off, validate

__all__ = [
    "FlipConfig",
    "FlipMeshError",
    "RunReport",
    "RunStatus",
    "Strategy",
    "SurfaceMesh",
    "delaunayify",
    "flip",
    "global_schedule",
    "load_off",
    "local_delaunayify",
    "parse_off",
    "save_off",
    "validate",
]
