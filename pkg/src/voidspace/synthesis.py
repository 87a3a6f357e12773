"""Void-space depth synthesis by inverse distance weighting.

Every background pixel of a region receives the weighted mean of that
region's contour sample depths, with weight 1/d^p over Euclidean pixel
distance d (pixel centers).  Larger p concentrates influence on the nearest
samples until the field approaches a nearest-neighbor partition.  The sample
list may be iterated with a stride (`step`) as a speed/quality tradeoff; the
stride phase is fixed at index 0 so results are reproducible.

The per-pixel loop is the hot path of the whole pipeline and runs as a
compiled kernel, parallel over rows.  No pixel writes anything but its own
output, so results are bit-identical for any thread count.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numba
import numpy as np
from numba import njit, prange

# the portable threading layer; avoids TBB-version probing warnings
numba.config.THREADING_LAYER = "workqueue"

from .contours import VoidSpaceMap
from .errors import ParameterError
from .scene import DepthImage

SOURCE_VESSEL = 0
SOURCE_VOID = 1
SOURCE_EMPTY = 2

EMPTY_REGION_DEPTH = 1.0        # sample-less regions sit at the far plane


@dataclass
class IdwParams:
    p: float = 2.0
    step: int = 1

    def validate(self):
        if not (float(self.p) > 0.0):
            raise ParameterError(f"power parameter p must be > 0, got {self.p}")
        if int(self.step) < 1 or int(self.step) != self.step:
            raise ParameterError(f"step must be an integer >= 1, got {self.step}")


@dataclass
class HeightField:
    z: np.ndarray               # (H, W) float64
    source: np.ndarray          # (H, W) uint8: vessel / void / empty

    @property
    def height(self) -> int:
        return self.z.shape[0]

    @property
    def width(self) -> int:
        return self.z.shape[1]


def thread_cap() -> int:
    """Data-parallel width: min(VSS_THREADS, available numba threads)."""
    limit = numba.config.NUMBA_NUM_THREADS
    env = os.environ.get("VSS_THREADS")
    if env:
        try:
            limit = max(1, min(limit, int(env)))
        except ValueError:
            pass
    return limit


@njit(cache=True, parallel=True)
def _idw_direct(region_id, depth, sx, sy, sz, starts, counts, p, step, out_z, out_src):
    half_p = 0.5 * p
    is_p2 = p == 2.0
    h, w = region_id.shape
    for yy in prange(h):
        fy = float(yy)
        for xx in range(w):
            rid = region_id[yy, xx]
            if rid < 0:
                out_z[yy, xx] = depth[yy, xx]
                out_src[yy, xx] = SOURCE_VESSEL
                continue
            n = counts[rid]
            if n == 0:
                out_z[yy, xx] = EMPTY_REGION_DEPTH
                out_src[yy, xx] = SOURCE_EMPTY
                continue
            s0 = starts[rid]
            fx = float(xx)
            wsum = 0.0
            wzsum = 0.0
            if is_p2:
                for k in range(s0, s0 + n, step):
                    dx = fx - sx[k]
                    dy = fy - sy[k]
                    wgt = 1.0 / (dx * dx + dy * dy)
                    wsum += wgt
                    wzsum += wgt * sz[k]
            else:
                for k in range(s0, s0 + n, step):
                    dx = fx - sx[k]
                    dy = fy - sy[k]
                    wgt = (dx * dx + dy * dy) ** (-half_p)
                    wsum += wgt
                    wzsum += wgt * sz[k]
            z = wzsum / wsum
            if not (wsum > 0.0 and math.isfinite(z)):
                # coincident sample (d = 0 -> exact) or full underflow (-> nearest)
                best = np.inf
                z = EMPTY_REGION_DEPTH
                for k in range(s0, s0 + n, step):
                    dx = fx - sx[k]
                    dy = fy - sy[k]
                    dsq = dx * dx + dy * dy
                    if dsq < best:
                        best = dsq
                        z = sz[k]
            out_z[yy, xx] = z
            out_src[yy, xx] = SOURCE_VOID


@njit(cache=True, parallel=True)
def _idw_scaled(region_id, depth, sx, sy, sz, starts, counts, p, step, out_z, out_src):
    """Variant for very large p: weights relative to the nearest sample so
    the intermediate d^p never overflows (mathematically identical)."""
    half_p = 0.5 * p
    h, w = region_id.shape
    for yy in prange(h):
        fy = float(yy)
        for xx in range(w):
            rid = region_id[yy, xx]
            if rid < 0:
                out_z[yy, xx] = depth[yy, xx]
                out_src[yy, xx] = SOURCE_VESSEL
                continue
            n = counts[rid]
            if n == 0:
                out_z[yy, xx] = EMPTY_REGION_DEPTH
                out_src[yy, xx] = SOURCE_EMPTY
                continue
            s0 = starts[rid]
            fx = float(xx)
            best = np.inf
            zbest = EMPTY_REGION_DEPTH
            for k in range(s0, s0 + n, step):
                dx = fx - sx[k]
                dy = fy - sy[k]
                dsq = dx * dx + dy * dy
                if dsq < best:
                    best = dsq
                    zbest = sz[k]
            if best == 0.0:
                out_z[yy, xx] = zbest
                out_src[yy, xx] = SOURCE_VOID
                continue
            wsum = 0.0
            wzsum = 0.0
            for k in range(s0, s0 + n, step):
                dx = fx - sx[k]
                dy = fy - sy[k]
                wgt = (best / (dx * dx + dy * dy)) ** half_p
                wsum += wgt
                wzsum += wgt * sz[k]
            out_z[yy, xx] = wzsum / wsum
            out_src[yy, xx] = SOURCE_VOID


def _flatten_samples(vmap: VoidSpaceMap):
    n_regions = len(vmap.regions)
    counts = np.zeros(n_regions, dtype=np.int64)
    for r in vmap.regions:
        counts[r.id] = len(r.sample_z)
    starts = np.zeros(n_regions, dtype=np.int64)
    if n_regions:
        starts[1:] = np.cumsum(counts)[:-1]
    total = int(counts.sum())
    sx = np.empty(total)
    sy = np.empty(total)
    sz = np.empty(total)
    for r in vmap.regions:
        s = starts[r.id]
        e = s + counts[r.id]
        sx[s:e] = r.sample_xy[:, 0]
        sy[s:e] = r.sample_xy[:, 1]
        sz[s:e] = r.sample_z
    return sx, sy, sz, starts, counts


def interpolate_void_depth(depth: DepthImage, vmap: VoidSpaceMap,
                           params: IdwParams) -> HeightField:
    """Fill void pixels from their region's contour samples; vessels copy through."""
    params.validate()
    p = float(params.p)
    step = int(params.step)
    sx, sy, sz, starts, counts = _flatten_samples(vmap)
    out_z = np.empty_like(depth.depth)
    out_src = np.empty(depth.depth.shape, dtype=np.uint8)
    max_dsq = float(depth.width ** 2 + depth.height ** 2)
    numba.set_num_threads(thread_cap())
    # d^p stays well inside float64 range for every realistic p; switch to the
    # nearest-relative formulation only when it would not
    if 0.5 * p * math.log10(max(max_dsq, 2.0)) > 250.0:
        kernel = _idw_scaled
    else:
        kernel = _idw_direct
    kernel(vmap.region_id, depth.depth, sx, sy, sz, starts, counts,
           p, step, out_z, out_src)
    return HeightField(out_z, out_src)


def axis_gradient(z: np.ndarray, same: np.ndarray, axis: int) -> np.ndarray:
    """Per-pixel derivative along `axis` using only neighbors of equal source.

    Central difference where both neighbors match, one-sided where one does,
    zero where neither; picks the symmetric stencil so mirrored inputs give
    exactly mirrored (negated) gradients.
    """
    prev_ok = np.zeros_like(same, dtype=bool)
    next_ok = np.zeros_like(same, dtype=bool)
    sl_prev = [slice(None)] * z.ndim
    sl_next = [slice(None)] * z.ndim
    sl_prev[axis] = slice(1, None)
    sl_next[axis] = slice(None, -1)
    eq_prev = np.take(same, np.arange(1, same.shape[axis]), axis=axis) == \
        np.take(same, np.arange(0, same.shape[axis] - 1), axis=axis)
    prev_ok[tuple(sl_prev)] = eq_prev
    next_ok[tuple(sl_next)] = eq_prev

    z_prev = np.roll(z, 1, axis=axis)
    z_next = np.roll(z, -1, axis=axis)
    grad = np.zeros_like(z)
    both = prev_ok & next_ok
    only_next = next_ok & ~prev_ok
    only_prev = prev_ok & ~next_ok
    grad[both] = (z_next[both] - z_prev[both]) * 0.5
    grad[only_next] = z_next[only_next] - z[only_next]
    grad[only_prev] = z[only_prev] - z_prev[only_prev]
    return grad


def reconstruct_normals(field: HeightField, k: float, camera=None) -> np.ndarray:
    """Unit view-space normals of the surface (x, y, k*z), oriented to camera.

    Differences never straddle a vessel/void/empty boundary, so each layer
    keeps its own relief.  Flat areas degenerate to (0, 0, -1).
    """
    gx = axis_gradient(field.z, field.source, axis=1) * k
    gy = axis_gradient(field.z, field.source, axis=0) * k
    n = np.stack([gx, gy, np.full_like(gx, -1.0)], axis=-1)
    n /= np.linalg.norm(n, axis=-1, keepdims=True)
    return n
