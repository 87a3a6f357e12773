"""Depth cues on top of the synthesized height field, and final compositing.

The void surface carries all depth encoding -- colormap, iso-lines, shading,
ambient-occlusion contact shadows -- while vessel pixels keep their own color
channel for the functional parameter.  Both layers share one light setup so
the scene reads as a single illuminated surface.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ParameterError
from .scene import DepthImage
from .synthesis import (SOURCE_EMPTY, SOURCE_VESSEL, SOURCE_VOID, HeightField,
                        axis_gradient)

AO_BIAS = 1e-3
ISO_LINE_COLOR = np.array([0.2, 0.2, 0.2])   # dark neutral, readable on any map
NEUTRAL_VESSEL = np.array([0.78, 0.78, 0.78])
DEFAULT_BACKGROUND = np.array([0.13, 0.13, 0.15])


class ColorMapKind(enum.Enum):
    CHROMADEPTH = "chromadepth"
    PSEUDO_CHROMADEPTH = "pseudo_chromadepth"
    MONO = "mono"
    NONE = "none"

    @classmethod
    def parse(cls, name: str) -> "ColorMapKind":
        aliases = {
            "chromadepth": cls.CHROMADEPTH, "cd": cls.CHROMADEPTH,
            "pseudo_chromadepth": cls.PSEUDO_CHROMADEPTH, "pcd": cls.PSEUDO_CHROMADEPTH,
            "mono": cls.MONO, "monochrome": cls.MONO, "dark_means_deep": cls.MONO,
            "none": cls.NONE, "off": cls.NONE,
        }
        key = str(name).strip().lower()
        if key not in aliases:
            raise ParameterError(f"unknown colormap {name!r}")
        return aliases[key]


@dataclass
class CueConfig:
    colormap: ColorMapKind = ColorMapKind.PSEUDO_CHROMADEPTH
    iso_count: int = 12
    iso_width: float = 1.5
    light_dir: np.ndarray = field(default_factory=lambda: np.array([-0.35, -0.45, -0.82]))
    ambient: float = 0.25
    diffuse: float = 0.65
    specular: float = 0.2
    shininess: float = 32.0
    ao_enabled: bool = True
    ao_radius: float = 10.0
    ao_samples: int = 16
    ao_strength: float = 0.6
    param_map: str = "green_yellow"

    def __post_init__(self):
        if isinstance(self.colormap, str):
            self.colormap = ColorMapKind.parse(self.colormap)
        self.light_dir = np.asarray(self.light_dir, dtype=np.float64)
        if self.iso_count < 0 or int(self.iso_count) != self.iso_count:
            raise ParameterError(f"iso_count must be an integer >= 0, got {self.iso_count}")
        if not (self.iso_width > 0):
            raise ParameterError(f"iso_width must be > 0, got {self.iso_width}")
        if self.ao_enabled and self.ao_samples < 1:
            raise ParameterError("ao_samples must be >= 1 when AO is enabled")
        if not (0.0 <= self.ao_strength <= 1.0):
            raise ParameterError(f"ao_strength must be in [0, 1], got {self.ao_strength}")
        if self.ao_enabled and not (self.ao_radius > 0):
            raise ParameterError(f"ao_radius must be > 0, got {self.ao_radius}")
        if self.param_map not in PARAM_MAPS:
            raise ParameterError(f"unknown param_map {self.param_map!r}")


def apply_colormap(z, kind: ColorMapKind) -> np.ndarray:
    """Map depth in [0, 1] to linear RGB; out-of-range input is clamped.

    chromadepth: hue sweep red -> green -> blue at full saturation/value.
    pseudo_chromadepth: componentwise red -> blue blend (red close, blue far).
    mono: white (close) -> black (far).
    none: the flat background constant, independent of z.
    """
    z = np.clip(np.asarray(z, dtype=np.float64), 0.0, 1.0)
    out = np.empty(z.shape + (3,))
    if kind == ColorMapKind.PSEUDO_CHROMADEPTH:
        out[..., 0] = 1.0 - z
        out[..., 1] = 0.0
        out[..., 2] = z
    elif kind == ColorMapKind.MONO:
        out[...] = (1.0 - z)[..., None]
    elif kind == ColorMapKind.CHROMADEPTH:
        hp = 4.0 * z                      # hue/60 deg over the 0..240 sweep
        sector = np.minimum(np.floor(hp), 3.0)
        f = hp - sector
        q = 1.0 - f
        out[..., 0] = np.select([sector == 0, sector == 1], [1.0, q], 0.0)
        out[..., 1] = np.select([sector == 0, sector == 3], [f, q], 1.0)
        out[..., 2] = np.select([sector == 2, sector == 3], [f, 1.0], 0.0)
    elif kind == ColorMapKind.NONE:
        out[...] = DEFAULT_BACKGROUND
    else:  # pragma: no cover
        raise ParameterError(f"unhandled colormap {kind}")
    return out


def draw_isolines(fieldmap: HeightField, iso_count: int, iso_width: float) -> np.ndarray:
    """Anti-aliased level-line coverage in [0, 1], nonzero only on void pixels.

    Levels sit at band centers (k + 0.5)/iso_count.  Coverage falls off with
    the screen-space distance to the nearest level, estimated as
    |z - level| / |grad z|, giving lines about `iso_width` pixels wide.
    """
    if iso_count < 0:
        raise ParameterError("iso_count must be >= 0")
    cov = np.zeros_like(fieldmap.z)
    if iso_count == 0:
        return cov
    z = fieldmap.z
    gx = axis_gradient(z, fieldmap.source, axis=1)
    gy = axis_gradient(z, fieldmap.source, axis=0)
    gmag = np.maximum(np.hypot(gx, gy), 1e-12)
    nearest = np.clip(np.round(z * iso_count - 0.5), 0, iso_count - 1)
    level = (nearest + 0.5) / iso_count
    pix_dist = np.abs(z - level) / gmag
    cov = np.clip(0.5 * iso_width + 0.5 - pix_dist, 0.0, 1.0)
    cov[fieldmap.source != SOURCE_VOID] = 0.0
    return cov


def shade(base: np.ndarray, normal: np.ndarray, cfg: CueConfig) -> np.ndarray:
    """Blinn-style ambient + diffuse + specular, viewer along -z."""
    light = cfg.light_dir / np.linalg.norm(cfg.light_dir)
    n_dot_l = np.clip(np.sum(normal * light, axis=-1), 0.0, None)
    color = np.asarray(base) * (cfg.ambient + cfg.diffuse * n_dot_l)[..., None]
    if cfg.specular > 0.0:
        half = light + np.array([0.0, 0.0, -1.0])
        half /= np.linalg.norm(half)
        n_dot_h = np.clip(np.sum(normal * half, axis=-1), 0.0, None)
        gloss = np.where(n_dot_l > 0.0, n_dot_h ** cfg.shininess, 0.0)
        color = color + (cfg.specular * gloss)[..., None]
    return color


@lru_cache(maxsize=16)
def _ao_offsets(n: int, radius: float) -> tuple[np.ndarray, np.ndarray]:
    """Fixed Poisson-disk-ish integer offsets within `radius` (seeded)."""
    rng = np.random.default_rng(0xA0C0FFEE)
    min_sep = max(1.0, 1.6 * radius / np.sqrt(n))
    chosen: list[tuple[int, int]] = []
    attempts = 0
    while len(chosen) < n:
        attempts += 1
        if attempts > 4000:
            min_sep = max(0.0, min_sep * 0.5)
            attempts = 0
        r = radius * np.sqrt(rng.uniform())
        a = rng.uniform(0.0, 2.0 * np.pi)
        dx = int(np.rint(r * np.cos(a)))
        dy = int(np.rint(r * np.sin(a)))
        if dx == 0 and dy == 0:
            continue
        if any((dx - cx) ** 2 + (dy - cy) ** 2 < min_sep ** 2 for cx, cy in chosen):
            continue
        chosen.append((dx, dy))
    off = np.array(chosen, dtype=np.int64)
    dist = np.hypot(off[:, 0], off[:, 1]).astype(np.float64)
    return off, dist


def ambient_occlusion(fieldmap: HeightField, cfg: CueConfig) -> np.ndarray:
    """Screen-space occlusion factor in [0, 1]; 1 everywhere when disabled.

    A sample occludes its center when its field depth is closer by more than
    a small bias; contributions attenuate with sample distance.  The factor
    is 1 - ao_strength * occlusion, so darkening concentrates where vessels
    meet the surrounding surface at similar depth (the anchoring shadow).
    """
    if not cfg.ao_enabled:
        return np.ones_like(fieldmap.z)
    z = fieldmap.z
    h, w = z.shape
    offsets, dists = _ao_offsets(int(cfg.ao_samples), float(cfg.ao_radius))
    weights = 1.0 - dists / (cfg.ao_radius + 1.0)
    ys, xs = np.mgrid[0:h, 0:w]
    occ = np.zeros_like(z)
    for (dx, dy), wgt in zip(offsets, weights):
        sy = np.clip(ys + dy, 0, h - 1)
        sxx = np.clip(xs + dx, 0, w - 1)
        occ += wgt * (z - z[sy, sxx] > AO_BIAS)
    occ /= weights.sum()
    return 1.0 - cfg.ao_strength * occ


def linear_to_srgb8(color: np.ndarray) -> np.ndarray:
    c = np.clip(color, 0.0, 1.0)
    srgb = np.where(c <= 0.0031308, 12.92 * c, 1.055 * c ** (1.0 / 2.4) - 0.055)
    return np.rint(srgb * 255.0).astype(np.uint8)


PARAM_MAPS = {}


def _param_green_yellow(t: np.ndarray) -> np.ndarray:
    """Discretized 5-step green -> yellow scale for vessel-surface scalars."""
    t = np.clip(np.asarray(t, dtype=np.float64), 0.0, 1.0)
    lo = np.array([0.08, 0.42, 0.12])
    hi = np.array([0.95, 0.85, 0.10])
    idx = np.minimum(np.floor(t * 5.0), 4.0) / 4.0
    return lo + idx[..., None] * (hi - lo)


def _param_gray(t: np.ndarray) -> np.ndarray:
    t = np.clip(np.asarray(t, dtype=np.float64), 0.0, 1.0)
    g = 0.25 + 0.6 * t
    return np.repeat(g[..., None], 3, axis=-1)


PARAM_MAPS["green_yellow"] = _param_green_yellow
PARAM_MAPS["gray"] = _param_gray


@dataclass
class CompositeResult:
    rgba: np.ndarray            # (H, W, 4) uint8 sRGB output
    pre_ao: np.ndarray          # (H, W, 3) linear shaded color before AO


def composite(depth: DepthImage, fieldmap: HeightField, field_normals: np.ndarray,
              iso_coverage: np.ndarray, ao_factor: np.ndarray, cfg: CueConfig,
              background: np.ndarray | None = None) -> CompositeResult:
    """Assemble the final image.

    Vessel pixels: functional-parameter color (or neutral gray), shaded with
    the rasterizer normals when available.  Void pixels: depth colormap,
    shaded with the reconstructed field normals, AO-attenuated, iso-lines
    blended last.  Sample-less regions and, in baseline mode (colormap
    "none"), all void pixels show the flat background color.
    """
    shape = fieldmap.z.shape
    for name, arr in (("depth", depth.depth), ("normals", field_normals[..., 0]),
                      ("iso", iso_coverage), ("ao", ao_factor)):
        if arr.shape != shape:
            raise ValueError(f"composite: {name} shape {arr.shape} != field {shape}")
    background = DEFAULT_BACKGROUND if background is None else np.asarray(background)

    vessel = fieldmap.source == SOURCE_VESSEL
    void = fieldmap.source == SOURCE_VOID

    normals = np.array(field_normals)
    if depth.normal is not None:
        normals[vessel] = depth.normal[vessel]

    base = apply_colormap(fieldmap.z, cfg.colormap)
    if depth.attribute is not None:
        base[vessel] = PARAM_MAPS[cfg.param_map](depth.attribute[vessel])
    else:
        base[vessel] = NEUTRAL_VESSEL

    pre_ao = shade(base, normals, cfg)
    color = pre_ao * ao_factor[..., None]

    blend = np.where(void, iso_coverage, 0.0)[..., None]
    color = color * (1.0 - blend) + ISO_LINE_COLOR * blend

    flat = fieldmap.source == SOURCE_EMPTY
    if cfg.colormap == ColorMapKind.NONE:
        flat = flat | void
    color[flat] = background

    rgba = np.empty(shape + (4,), dtype=np.uint8)
    rgba[..., :3] = linear_to_srgb8(color)
    rgba[..., 3] = 255
    return CompositeResult(rgba, pre_ao)
