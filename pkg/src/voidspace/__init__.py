"""Depth-cued rendering of vascular scenes over interpolated void-space height fields."""

from .bench import compare_step_artifacts, preset_cameras, run_benchmark
from .contours import (Contour, Region, RegionStats, VoidSpaceMap,
                       label_void_spaces, region_stats, trace_contours)
from .cues import (ColorMapKind, CompositeResult, CueConfig, ambient_occlusion,
                   apply_colormap, composite, draw_isolines, shade)
from .errors import (ConfigError, DepthFormatError, EmptySceneError,
                     MeshFormatError, ParameterError, StageError, VoidSpaceError)
from .geometry import Camera, Mesh, load_mesh
from .pipeline import RenderConfig, RunStats, parse_config, render_frame
from .raster import rasterize
from .scene import (BACKGROUND_DEPTH, DepthImage, linearize_depth,
                    load_depth_map, normalize_depth)
from .synthesis import (SOURCE_EMPTY, SOURCE_VESSEL, SOURCE_VOID, HeightField,
                        IdwParams, interpolate_void_depth, reconstruct_normals)

__version__ = "0.1.0"

__all__ = [
    "BACKGROUND_DEPTH", "Camera", "ColorMapKind", "CompositeResult", "ConfigError",
    "Contour", "CueConfig", "DepthFormatError", "DepthImage", "EmptySceneError",
    "HeightField", "IdwParams", "Mesh", "MeshFormatError", "ParameterError",
    "Region", "RegionStats", "RenderConfig", "RunStats", "SOURCE_EMPTY",
    "SOURCE_VESSEL", "SOURCE_VOID", "StageError", "VoidSpaceError", "VoidSpaceMap",
    "ambient_occlusion", "apply_colormap", "compare_step_artifacts", "composite",
    "draw_isolines", "interpolate_void_depth", "label_void_spaces",
    "linearize_depth", "load_depth_map", "load_mesh", "normalize_depth",
    "parse_config", "preset_cameras", "rasterize", "reconstruct_normals",
    "region_stats", "render_frame", "run_benchmark", "shade", "trace_contours",
]
