"""Depth images and the depth-domain operations applied right after ingest.

A DepthImage is the pipeline's common currency: per-pixel linear view-space
depth plus a boolean background mask.  The mask is authoritative; background
pixels additionally carry +inf as a sentinel so that accidental reads stand
out instead of blending in.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import imgio
from .errors import DepthFormatError, EmptySceneError

BACKGROUND_DEPTH = np.inf


@dataclass
class DepthImage:
    depth: np.ndarray                    # (H, W) float64, linear view-space depth
    background: np.ndarray               # (H, W) bool, True where no geometry
    attribute: np.ndarray | None = None  # (H, W) scalar in [0, 1] on vessel pixels
    normal: np.ndarray | None = None     # (H, W, 3) unit view-space normals

    def __post_init__(self):
        self.depth = np.asarray(self.depth, dtype=np.float64)
        self.background = np.asarray(self.background, dtype=bool)
        if self.depth.shape != self.background.shape:
            raise ValueError("depth and background shapes differ")

    @property
    def height(self) -> int:
        return self.depth.shape[0]

    @property
    def width(self) -> int:
        return self.depth.shape[1]

    @property
    def foreground(self) -> np.ndarray:
        return ~self.background


def linearize_depth(d_ndc, near: float, far: float):
    """Invert the standard projective depth mapping.

    Returns near*far / (far - d_ndc*(far - near)): `near` at 0, `far` at 1,
    strictly increasing in between.  Works elementwise on arrays.
    """
    d = np.asarray(d_ndc, dtype=np.float64)
    out = (near * far) / (far - d * (far - near))
    return float(out) if np.isscalar(d_ndc) else out


def normalize_depth(img: DepthImage) -> DepthImage:
    """Affinely map foreground depths onto [0, 1]; background is untouched.

    Min and max are taken over foreground pixels only.  A constant-depth
    scene maps to 0 everywhere (the closest object reads as depth 0).
    """
    fg = img.foreground
    if not fg.any():
        raise EmptySceneError("no foreground pixel to normalize")
    vals = img.depth[fg]
    lo = float(vals.min())
    hi = float(vals.max())
    depth = np.full_like(img.depth, BACKGROUND_DEPTH)
    if hi > lo:
        depth[fg] = (img.depth[fg] - lo) / (hi - lo)
    else:
        depth[fg] = 0.0
    return DepthImage(depth, img.background.copy(), img.attribute, img.normal)


def load_depth_map(path, near: float | None = None, far: float | None = None) -> DepthImage:
    """Load a PFM (already linear) or 16-bit grayscale PNG (NDC) depth map.

    PFM background pixels are those that are +inf, NaN, or <= 0.  PNG
    background is the reserved maximum sample 65535; the rest is NDC depth
    in [0, 1] and gets linearized, which requires `near` and `far`.
    """
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".pfm":
        raw = imgio.read_pfm(path)
        background = ~np.isfinite(raw) | (raw <= 0.0)
        depth = np.where(background, BACKGROUND_DEPTH, raw)
        return DepthImage(depth, background)
    if suffix == ".png":
        if near is None or far is None:
            raise DepthFormatError("near and far are required for PNG depth input")
        samples = imgio.read_png16(path)
        background = samples == 65535
        d_ndc = samples.astype(np.float64) / 65535.0
        depth = np.where(background, BACKGROUND_DEPTH,
                         linearize_depth(d_ndc, float(near), float(far)))
        return DepthImage(depth, background)
    raise DepthFormatError(f"{path}: unknown depth-map format {suffix!r}")
