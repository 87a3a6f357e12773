"""Pipeline orchestration: config file -> stages -> final PNG + run stats.

Stage order is fixed: ingest (rasterize or load) -> linearize -> normalize ->
contours -> labeling -> interpolation -> normals -> cues -> composite.  Each
stage is timed, and failures are re-raised with the stage name attached.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from . import imgio
from .contours import contours_to_json, label_void_spaces, region_stats, trace_contours
from .cues import (ColorMapKind, CueConfig, ambient_occlusion, composite,
                   draw_isolines)
from .errors import ConfigError, StageError, VoidSpaceError
from .geometry import Camera, load_mesh
from .raster import rasterize
from .scene import DepthImage, load_depth_map, normalize_depth
from .synthesis import HeightField, IdwParams, interpolate_void_depth, reconstruct_normals


@dataclass
class RenderConfig:
    mesh: str | None = None
    attribute: str | None = None
    depth_map: str | None = None
    near: float | None = None
    far: float | None = None
    camera: Camera | None = None
    idw: IdwParams = dc_field(default_factory=IdwParams)
    cues: CueConfig = dc_field(default_factory=CueConfig)
    relief_scale: float | None = None      # None -> 0.5 * max(width, height)
    background: tuple[float, float, float] = (0.13, 0.13, 0.15)
    output: str | None = None
    dump_layers: bool = False


@dataclass
class RunStats:
    stage_ms: dict[str, float] = dc_field(default_factory=dict)
    region_count: int = 0
    max_samples: int = 0

    def to_json(self) -> str:
        return json.dumps({
            "stages_ms": {k: round(v, 3) for k, v in self.stage_ms.items()},
            "region_count": self.region_count,
            "max_samples": self.max_samples,
        })


_CAMERA_DEFAULTS = {
    "position": [0.0, 0.0, -6.0],
    "target": [0.0, 0.0, 0.0],
    "up": [0.0, 1.0, 0.0],
    "vfov_deg": 45.0,
    "near": 0.1,
    "far": 100.0,
    "width": 960,
    "height": 540,
}

_CUE_DEFAULTS = {
    "colormap": "pseudo_chromadepth",
    "iso_count": 12,
    "iso_width": 1.5,
    "light_dir": [-0.35, -0.45, -0.82],
    "ambient": 0.25,
    "diffuse": 0.65,
    "specular": 0.2,
    "shininess": 32.0,
    "ao_enabled": True,
    "ao_radius": 10.0,
    "ao_samples": 16,
    "ao_strength": 0.6,
    "param_map": "green_yellow",
}


def _typed(value, expected, path):
    if expected is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"expected a number, got {value!r}", path)
        return float(value)
    if expected is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"expected an integer, got {value!r}", path)
        return value
    if expected is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"expected a boolean, got {value!r}", path)
        return value
    if expected is str:
        if not isinstance(value, str):
            raise ConfigError(f"expected a string, got {value!r}", path)
        return value
    if expected == "vec3":
        if (not isinstance(value, list) or len(value) != 3
                or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value)):
            raise ConfigError(f"expected a list of 3 numbers, got {value!r}", path)
        return [float(v) for v in value]
    raise AssertionError(expected)


def _take_section(data: dict, key: str, path: str) -> dict:
    section = data.pop(key, {})
    if not isinstance(section, dict):
        raise ConfigError("expected an object", f"{path}{key}")
    return dict(section)


def _reject_unknown(section: dict, path: str):
    if section:
        key = sorted(section)[0]
        raise ConfigError("unknown key", f"{path}{key}")


def parse_config(path) -> RenderConfig:
    """Strict JSON config: unknown keys and type mismatches fail loudly.

    Every field has a documented default; an empty object is a valid config
    (p=2, step=1, pseudo-chromadepth, 12 iso-lines).
    """
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("top level must be an object")
    data = dict(data)
    cfg = RenderConfig()

    inp = _take_section(data, "input", "")
    if "mesh" in inp and "depth_map" in inp:
        raise ConfigError("give either mesh or depth_map, not both", "input")
    if "mesh" in inp:
        cfg.mesh = _typed(inp.pop("mesh"), str, "input.mesh")
        if "attribute" in inp:
            cfg.attribute = _typed(inp.pop("attribute"), str, "input.attribute")
    elif "depth_map" in inp:
        cfg.depth_map = _typed(inp.pop("depth_map"), str, "input.depth_map")
        if "near" in inp:
            cfg.near = _typed(inp.pop("near"), float, "input.near")
        if "far" in inp:
            cfg.far = _typed(inp.pop("far"), float, "input.far")
    _reject_unknown(inp, "input.")

    cam = _take_section(data, "camera", "")
    cam_kwargs = {}
    for key, default in _CAMERA_DEFAULTS.items():
        expected = "vec3" if isinstance(default, list) else type(default)
        value = cam.pop(key, default)
        cam_kwargs[key] = _typed(value, expected, f"camera.{key}")
    _reject_unknown(cam, "camera.")
    try:
        cfg.camera = Camera(np.array(cam_kwargs.pop("position")),
                            np.array(cam_kwargs.pop("target")),
                            np.array(cam_kwargs.pop("up")), **cam_kwargs)
    except VoidSpaceError as exc:
        raise ConfigError(str(exc), "camera") from exc

    idw = _take_section(data, "idw", "")
    p = _typed(idw.pop("p", 2.0), float, "idw.p")
    step = _typed(idw.pop("step", 1), int, "idw.step")
    _reject_unknown(idw, "idw.")
    cfg.idw = IdwParams(p=p, step=step)
    try:
        cfg.idw.validate()
    except VoidSpaceError as exc:
        raise ConfigError(str(exc), "idw.p" if "power" in str(exc) else "idw.step") from exc

    cue = _take_section(data, "cues", "")
    cue_kwargs = {}
    for key, default in _CUE_DEFAULTS.items():
        expected = "vec3" if isinstance(default, list) else type(default)
        value = cue.pop(key, default)
        cue_kwargs[key] = _typed(value, expected, f"cues.{key}")
    _reject_unknown(cue, "cues.")
    try:
        cue_kwargs["light_dir"] = np.array(cue_kwargs["light_dir"])
        cfg.cues = CueConfig(**cue_kwargs)
    except VoidSpaceError as exc:
        raise ConfigError(str(exc), "cues") from exc

    if "relief_scale" in data:
        value = data.pop("relief_scale")
        cfg.relief_scale = None if value is None else _typed(value, float, "relief_scale")
    if "background" in data:
        cfg.background = tuple(_typed(data.pop("background"), "vec3", "background"))
    if "output" in data:
        cfg.output = _typed(data.pop("output"), str, "output")
    if "dump_layers" in data:
        cfg.dump_layers = _typed(data.pop("dump_layers"), bool, "dump_layers")
    _reject_unknown(data, "")
    return cfg


class _StageTimer:
    def __init__(self, stats: RunStats):
        self.stats = stats

    def run(self, name: str, fn, *args, **kwargs):
        t0 = time.perf_counter()
        try:
            result = fn(*args, **kwargs)
        except VoidSpaceError as exc:
            raise StageError(name, exc) from exc
        self.stats.stage_ms[name] = (time.perf_counter() - t0) * 1000.0
        return result


def render_frame(cfg: RenderConfig):
    """Run the full pipeline; returns (CompositeResult, RunStats).

    Writes the PNG (and optional layer dumps) when cfg.output is set.
    """
    stats = RunStats()
    timer = _StageTimer(stats)

    if cfg.mesh is not None:
        if cfg.camera is None:
            raise StageError("ingest", VoidSpaceError("mesh input requires a camera"))
        mesh = timer.run("load", load_mesh, cfg.mesh, cfg.attribute)
        depth = timer.run("rasterize", rasterize, mesh, cfg.camera)
        stats.stage_ms["linearize"] = 0.0   # rasterizer emits linear depth directly
    elif cfg.depth_map is not None:
        depth = timer.run("load", load_depth_map, cfg.depth_map, cfg.near, cfg.far)
        # for PNG input the linearization happened inside the loader; billed here
        stats.stage_ms["linearize"] = stats.stage_ms.pop("load")
        stats.stage_ms["load"] = 0.0
    else:
        raise StageError("ingest", VoidSpaceError("config names no mesh or depth_map input"))

    depth = timer.run("normalize", normalize_depth, depth)
    mask = depth.foreground
    contours = timer.run("contours", trace_contours, mask)
    vmap = timer.run("labeling", label_void_spaces, mask, contours, depth)
    rs = region_stats(vmap)
    stats.region_count, stats.max_samples = rs.region_count, rs.max_samples
    fieldmap = timer.run("interpolation", interpolate_void_depth, depth, vmap, cfg.idw)
    relief = cfg.relief_scale if cfg.relief_scale is not None \
        else 0.5 * max(fieldmap.width, fieldmap.height)
    normals = timer.run("normals", reconstruct_normals, fieldmap, relief, cfg.camera)

    def _cues():
        iso = draw_isolines(fieldmap, cfg.cues.iso_count, cfg.cues.iso_width)
        ao = ambient_occlusion(fieldmap, cfg.cues)
        return iso, ao

    iso_cov, ao = timer.run("cues", _cues)
    result = timer.run("composite", composite, depth, fieldmap, normals,
                       iso_cov, ao, cfg.cues, np.asarray(cfg.background))

    if cfg.output:
        out = Path(cfg.output)
        out.parent.mkdir(parents=True, exist_ok=True)
        imgio.write_png_rgba(out, result.rgba)
        if cfg.dump_layers:
            stem = out.with_suffix("")
            imgio.write_png_gray(f"{stem}.ao.png", ao)
            imgio.write_png_gray(f"{stem}.iso.png", iso_cov)
            imgio.write_png_indexed(f"{stem}.regions.png", vmap.region_id)
            imgio.write_pfm(f"{stem}.height.pfm", fieldmap.z)
            Path(f"{stem}.contours.json").write_text(
                json.dumps(contours_to_json(contours)))
    return result, stats
