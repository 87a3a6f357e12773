"""File I/O for the image formats crossing the pipeline boundary.

PFM carries linear float depth (grayscale 'Pf', little-endian, bottom-up
scanline order per the format convention).  16-bit grayscale PNG carries
nonlinear NDC depth with 65535 reserved for background.  8-bit PNG is the
output side.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import DepthFormatError


def read_pfm(path) -> np.ndarray:
    """Read a grayscale PFM into a float64 (H, W) array, top row first."""
    raw = Path(path).read_bytes()
    m = re.match(rb"(Pf)\s+(\d+)\s+(\d+)\s+([-+0-9.eE]+)\s", raw)
    if not m:
        raise DepthFormatError(f"{path}: not a grayscale PFM file")
    width, height = int(m.group(2)), int(m.group(3))
    scale = float(m.group(4))
    dtype = "<f4" if scale < 0 else ">f4"
    data = np.frombuffer(raw, dtype=dtype, count=width * height, offset=m.end())
    if data.size != width * height:
        raise DepthFormatError(f"{path}: truncated PFM payload")
    img = data.reshape(height, width)
    # PFM stores rows bottom-to-top
    return np.flipud(img).astype(np.float64)


def write_pfm(path, img: np.ndarray) -> None:
    img = np.asarray(img, dtype=np.float32)
    if img.ndim != 2:
        raise ValueError("write_pfm expects a 2-D array")
    header = f"Pf\n{img.shape[1]} {img.shape[0]}\n-1.0\n".encode("ascii")
    payload = np.flipud(img).astype("<f4").tobytes()
    Path(path).write_bytes(header + payload)


def read_png16(path) -> np.ndarray:
    """Read a 16-bit grayscale PNG as a uint16 (H, W) array."""
    with Image.open(path) as im:
        if im.mode not in ("I;16", "I;16B", "I"):
            raise DepthFormatError(
                f"{path}: expected 16-bit grayscale PNG, got mode {im.mode!r}"
            )
        arr = np.array(im)
    if arr.dtype == np.int32:  # mode "I" decodes to int32
        if arr.min() < 0 or arr.max() > 65535:
            raise DepthFormatError(f"{path}: sample values exceed 16-bit range")
    return arr.astype(np.uint16)


def write_png_rgba(path, rgba: np.ndarray) -> None:
    rgba = np.ascontiguousarray(rgba, dtype=np.uint8)
    Image.fromarray(rgba, mode="RGBA").save(path, format="PNG")


def write_png_gray(path, gray: np.ndarray) -> None:
    """8-bit grayscale dump; float input in [0, 1] is quantized."""
    arr = np.asarray(gray)
    if arr.dtype != np.uint8:
        arr = np.rint(np.clip(arr, 0.0, 1.0) * 255.0).astype(np.uint8)
    Image.fromarray(arr, mode="L").save(path, format="PNG")


def encode_png_rgba(rgba: np.ndarray) -> bytes:
    """PNG-encode to bytes (for HTTP responses); deterministic for equal input."""
    import io

    rgba = np.ascontiguousarray(rgba, dtype=np.uint8)
    buf = io.BytesIO()
    Image.fromarray(rgba, mode="RGBA").save(buf, format="PNG")
    return buf.getvalue()


def write_png_indexed(path, ids: np.ndarray) -> None:
    """Region-id debug image: ids cycled through a fixed 256-color palette.

    -1 (foreground) maps to palette slot 0 (black).
    """
    ids = np.asarray(ids, dtype=np.int64)
    img = np.where(ids < 0, 0, ids % 255 + 1).astype(np.uint8)
    pil = Image.fromarray(img, mode="P")
    rng = np.random.RandomState(7)
    palette = rng.randint(40, 256, size=(256, 3), dtype=np.uint8)
    palette[0] = (0, 0, 0)
    pil.putpalette(palette.flatten().tolist())
    pil.save(path, format="PNG")
