"""Timing harness for the void-surface stages across camera distances.

Reproduces the shape of the classic far/medium/close experiment: the far
camera keeps the silhouette away from the frame borders (one huge region,
long contours), the close camera cuts it at several places (many small
regions).  Vessel rendering itself is excluded from every timing; only the
depth-domain stages are measured.  Absolute milliseconds are hardware-bound,
so downstream checks should only rely on ratios and trends.
"""

from __future__ import annotations

import json
import statistics
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .contours import label_void_spaces, region_stats, trace_contours
from .cues import CueConfig, ambient_occlusion, composite, draw_isolines
from .geometry import Camera, Mesh, load_mesh
from .raster import rasterize
from .scene import DepthImage, normalize_depth
from .synthesis import IdwParams, interpolate_void_depth, reconstruct_normals

PRESET_NAMES = ("far", "medium", "close")
SPREAD_LIMIT = 0.25


@dataclass
class BenchCell:
    median_ms: float
    iqr_ms: float
    interp_median_ms: float
    high_spread: bool


@dataclass
class BenchPreset:
    regions: int
    max_samples: int
    border_crossings: int
    steps: dict[int, BenchCell] = field(default_factory=dict)


@dataclass
class BenchReport:
    presets: dict[str, BenchPreset] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            name: {
                "regions": p.regions,
                "max_samples": p.max_samples,
                "border_crossings": p.border_crossings,
                "steps": {
                    str(s): {
                        "median_ms": round(c.median_ms, 3),
                        "iqr_ms": round(c.iqr_ms, 3),
                        "interp_median_ms": round(c.interp_median_ms, 3),
                        "high_spread": c.high_spread,
                    }
                    for s, c in p.steps.items()
                },
            }
            for name, p in self.presets.items()
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def preset_cameras(mesh: Mesh, width: int = 1280, height: int = 720) -> dict[str, Camera]:
    """Far/medium/close cameras from the mesh bounding sphere."""
    lo, hi = mesh.bounds()
    center = (lo + hi) * 0.5
    radius = max(float(np.linalg.norm(hi - lo)) * 0.5, 1e-6)
    tan_y = np.tan(np.deg2rad(45.0) * 0.5)
    tan_x = tan_y * (width / height)
    fit = radius / min(tan_x, tan_y)        # distance putting the sphere inside frame
    factors = {"far": 1.1, "medium": 0.72, "close": 0.42}
    cams = {}
    for name, f in factors.items():
        dist = fit * f
        position = center + np.array([0.25, 0.18, -1.0]) / np.linalg.norm([0.25, 0.18, -1.0]) * dist
        cams[name] = Camera(position, center, np.array([0.0, 1.0, 0.0]),
                            vfov_deg=45.0, near=max(dist - radius * 1.05, dist * 1e-3),
                            far=dist + radius * 1.05, width=width, height=height)
    return cams


def count_border_crossings(mask: np.ndarray) -> int:
    """Number of distinct foreground runs along the four frame edges."""
    total = 0
    for edge in (mask[0, :], mask[-1, :], mask[:, 0], mask[:, -1]):
        e = np.concatenate([[False], np.asarray(edge, bool)])
        total += int(np.count_nonzero(e[1:] & ~e[:-1]))
    return total


def _check_preset(name: str, crossings: int):
    want = {"far": lambda c: c == 0,
            "medium": lambda c: 1 <= c <= 6,
            "close": lambda c: c > 6}
    if name in want and not want[name](crossings):
        warnings.warn(
            f"preset '{name}' has {crossings} border crossings; "
            "silhouette criterion not met, measuring anyway", stacklevel=2)


def _timed_stages(raw_depth: DepthImage, params: IdwParams, cues: CueConfig):
    """One measured run over the depth-domain stages; returns (total_ms, interp_ms, vmap).

    Rasterizer output is already linear, so the linearize step costs nothing
    here; it is still inside the timed window for depth-map inputs.
    """
    t0 = time.perf_counter()
    depth = normalize_depth(raw_depth)
    mask = depth.foreground
    contours = trace_contours(mask)
    vmap = label_void_spaces(mask, contours, depth)
    t1 = time.perf_counter()
    fieldmap = interpolate_void_depth(depth, vmap, params)
    t2 = time.perf_counter()
    normals = reconstruct_normals(fieldmap, 0.5 * max(fieldmap.width, fieldmap.height))
    iso = draw_isolines(fieldmap, cues.iso_count, cues.iso_width)
    ao = ambient_occlusion(fieldmap, cues)
    composite(depth, fieldmap, normals, iso, ao, cues)
    t3 = time.perf_counter()
    return (t3 - t0) * 1000.0, (t2 - t1) * 1000.0, vmap


def run_benchmark(scene_path, presets=PRESET_NAMES, steps=(1, 3, 5),
                  repeats: int = 5, width: int = 1280, height: int = 720,
                  p: float = 2.0) -> BenchReport:
    """Median stage times (vessel rendering excluded) per preset and step size."""
    mesh = load_mesh(scene_path)
    cameras = preset_cameras(mesh, width, height)
    cues = CueConfig()
    report = BenchReport()
    for name in presets:
        depth_raw = rasterize(mesh, cameras[name])
        crossings = count_border_crossings(depth_raw.foreground)
        _check_preset(name, crossings)
        # region stats from a single untimed pass
        dn = normalize_depth(depth_raw)
        vmap = label_void_spaces(dn.foreground, trace_contours(dn.foreground), dn)
        rs = region_stats(vmap)
        preset = BenchPreset(rs.region_count, rs.max_samples, crossings)
        for step in steps:
            params = IdwParams(p=p, step=int(step))
            totals, interps = [], []
            for _ in range(repeats):
                total_ms, interp_ms, _ = _timed_stages(depth_raw, params, cues)
                totals.append(total_ms)
                interps.append(interp_ms)
            med = statistics.median(totals)
            q1, q3 = np.percentile(totals, [25, 75])
            iqr = float(q3 - q1)
            preset.steps[int(step)] = BenchCell(
                med, iqr, statistics.median(interps),
                high_spread=(iqr / med > SPREAD_LIMIT if med > 0 else False))
        report.presets[name] = preset
    return report


def compare_step_artifacts(scene_path, steps=(1, 3, 5, 10), preset: str = "far",
                           width: int = 1280, height: int = 720,
                           p: float = 2.0) -> dict:
    """Mean/max |depth deviation| of each step size against step 1, void pixels only."""
    mesh = load_mesh(scene_path)
    camera = preset_cameras(mesh, width, height)[preset]
    depth = normalize_depth(rasterize(mesh, camera))
    mask = depth.foreground
    vmap = label_void_spaces(mask, trace_contours(mask), depth)
    fields = {}
    for step in sorted(set(steps) | {1}):
        fields[step] = interpolate_void_depth(depth, vmap, IdwParams(p=p, step=int(step)))
    ref = fields[1]
    void = ref.source == 1
    out = {}
    for step in steps:
        dz = np.abs(fields[step].z[void] - ref.z[void])
        out[int(step)] = {
            "mean_abs_dz": float(dz.mean()) if dz.size else 0.0,
            "max_abs_dz": float(dz.max()) if dz.size else 0.0,
        }
    return out
