"""Patched line segment road-graph toolkit.

Encodes vector road graphs into per-patch line segments, renders them into
differentiable soft masks, fits segments to raster targets by gradient
descent, reconstructs road graphs from the patch representation and scores
graphs with path-length and topology metrics.
"""

__version__ = "0.1.0"

from .codec import PatchClass, PatchGrid, encode_graph
from .fitter import (FitConfig, FitReport, Optimizer, SupervisionMode,
                     canonicalize_segment, fit_palis, fit_vector_supervised,
                     l1_vector_loss)
from .geometry import LineSegment, PatchRect, Point
from .graph import RoadGraph
from .metrics import AplsParams, TopoParams, TopoScore, apls, densify, topo
from .raster import (EndpointGradient, RasterParams, backward,
                     compose_soft_mask, dice_backward, dice_loss,
                     rasterize_patch)
from .reconstruct import ReconstructParams, reconstruct_graph

__all__ = [
    "AplsParams", "EndpointGradient", "FitConfig", "FitReport", "LineSegment",
    "Optimizer", "PatchClass", "PatchGrid", "PatchRect", "Point", "RasterParams",
    "ReconstructParams", "RoadGraph", "SupervisionMode", "TopoParams",
    "TopoScore", "apls", "backward", "canonicalize_segment", "compose_soft_mask",
    "densify", "dice_backward", "dice_loss", "encode_graph", "fit_palis",
    "fit_vector_supervised", "l1_vector_loss", "rasterize_patch",
    "reconstruct_graph", "topo",
]
