"""Silhouette contours with nesting hierarchy, and void-region labeling.

Foreground is 8-connected, background 4-connected: the complementary pairing
that keeps hole/outer relationships consistent.  Border following is the
classic raster-scan marking scheme: every border gets a number in discovery
order, outer and hole borders are distinguished by their start condition,
and the parent of each new border follows from the kind of the last border
crossed on the current row.  The image is padded with one zero row/column so
pixels touching the frame edge are traced like any other border pixel.

Void labeling then assigns every background pixel to its 4-connected
component and collects, per region, the contour pixels 8-adjacent to it --
the enclosing border plus the outer borders of islands inside it.  Frame
edges split regions but never contribute samples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .scene import DepthImage

# 8-neighborhood in counterclockwise order (y grows downward on screen)
_DY = (0, -1, -1, -1, 0, 1, 1, 1)
_DX = (1, 1, 0, -1, -1, -1, 0, 1)

OUTER = "outer"
HOLE = "hole"


@dataclass
class Contour:
    id: int
    pixels: np.ndarray          # (K, 2) int32 (x, y) in traversal order, closed cycle
    kind: str                   # "outer" | "hole"
    parent: int | None

    def pixel_set(self) -> set[tuple[int, int]]:
        return {(int(x), int(y)) for x, y in self.pixels}


@dataclass
class Region:
    id: int
    contour_ids: list[int]
    sample_xy: np.ndarray       # (N, 2) int32 (x, y) foreground contour pixels
    sample_z: np.ndarray        # (N,) float64 normalized depth at those pixels
    flagged: bool = False       # True when the region has no contour samples


@dataclass
class VoidSpaceMap:
    region_id: np.ndarray       # (H, W) int32, -1 on foreground
    regions: list[Region]
    contours: list[Contour]


@dataclass
class RegionStats:
    region_count: int
    max_samples: int


def trace_contours(mask: np.ndarray) -> list[Contour]:
    """Find all outer and hole borders of the foreground mask with parents.

    Returns contours in raster-scan discovery order; each pixel list is the
    closed traversal cycle starting at the scan hit (pixels on one-pixel-wide
    spurs appear once per pass, keeping the cycle 8-connected).
    """
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    f = np.zeros((h + 2, w + 2), dtype=np.int32)
    f[1:-1, 1:-1] = mask.astype(np.int32)

    # border bookkeeping; index = border number, entry 1 is the outer frame
    kinds: list[str] = ["", HOLE]
    parents: list[int] = [0, 0]
    pixel_seqs: list[list[tuple[int, int]]] = [[], []]

    nbd = 1
    for i in range(1, h + 1):
        lnbd = 1
        row = f[i]
        for j in range(1, w + 1):
            v = row[j]
            if v == 0:
                continue
            start_dir = -1
            if v == 1 and row[j - 1] == 0:
                kind = OUTER
                start_dir = 4          # west neighbor is the zero pixel
            elif v >= 1 and row[j + 1] == 0:
                kind = HOLE
                start_dir = 0          # east neighbor is the zero pixel
                if v > 1:
                    lnbd = v
            if start_dir >= 0:
                nbd += 1
                prev = kinds[lnbd]
                parents.append(parents[lnbd] if prev == kind else lnbd)
                kinds.append(kind)
                pixel_seqs.append(_follow_border(f, i, j, start_dir, nbd))
            v = row[j]
            if v != 1:
                lnbd = abs(v)

    contours = []
    for b in range(2, nbd + 1):
        pix = np.array([(x - 1, y - 1) for y, x in pixel_seqs[b]], dtype=np.int32)
        parent = parents[b] - 2 if parents[b] >= 2 else None
        contours.append(Contour(b - 2, pix.reshape(-1, 2), kinds[b], parent))
    return contours


def _follow_border(f, i, j, start_dir, nbd):
    """Trace one border from its scan hit, marking pixels as it goes."""
    found = -1
    for k in range(8):
        d = (start_dir - k) % 8          # clockwise search for the first neighbor
        if f[i + _DY[d], j + _DX[d]] != 0:
            found = d
            break
    if found < 0:
        f[i, j] = -nbd                   # isolated pixel
        return [(i, j)]

    seq = [(i, j)]
    i1, j1 = i + _DY[found], j + _DX[found]
    dir_prev = found                     # direction ci3 -> (i2, j2)
    i3, j3 = i, j
    while True:
        east_zero_seen = False
        d = dir_prev
        for _ in range(8):
            d = (d + 1) % 8              # counterclockwise, starting past (i2, j2)
            yy, xx = i3 + _DY[d], j3 + _DX[d]
            if f[yy, xx] != 0:
                break
            if d == 0:
                east_zero_seen = True
        i4, j4 = i3 + _DY[d], j3 + _DX[d]

        if east_zero_seen:
            f[i3, j3] = -nbd
        elif f[i3, j3] == 1:
            f[i3, j3] = nbd

        if (i4, j4) == (i, j) and (i3, j3) == (i1, j1):
            break
        dir_prev = (d + 4) % 8           # direction from the new pixel back to i3
        i3, j3 = i4, j4
        seq.append((i3, j3))
    return seq


def label_void_spaces(mask: np.ndarray, contours: list[Contour],
                      depth: DepthImage) -> VoidSpaceMap:
    """Partition background into 4-connected regions and attach their samples.

    A region's sample list is the union, in contour order then traversal
    order, of the pixels of every contour that touches it (8-adjacency).
    Sample depths are read from `depth`, which is expected to be normalized.
    Regions without any contour sample (e.g. an all-background frame) are
    flagged rather than rejected.
    """
    mask = np.asarray(mask, dtype=bool)
    region_id = _label_background(mask)
    n_regions = int(region_id.max()) + 1
    return _build_map(mask, contours, depth, region_id, n_regions)


def _label_background(mask: np.ndarray) -> np.ndarray:
    structure = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])
    labels, n = ndimage.label(~mask, structure=structure)
    region_id = np.full(mask.shape, -1, dtype=np.int32)
    if n == 0:
        return region_id
    # relabel by first raster occurrence so ids are discovery-ordered
    flat = labels.ravel()
    first = np.full(n + 1, flat.size, dtype=np.int64)
    idx = np.arange(flat.size)
    np.minimum.at(first, flat, idx)
    order = np.argsort(first[1:], kind="stable")
    remap = np.empty(n + 1, dtype=np.int32)
    remap[0] = -1
    remap[1 + order] = np.arange(n, dtype=np.int32)
    region_id[:] = remap[labels]
    return region_id


def _build_map(mask, contours, depth, region_id, n_regions):
    h, w = mask.shape
    per_region_xy: list[list[np.ndarray]] = [[] for _ in range(n_regions)]
    per_region_cids: list[list[int]] = [[] for _ in range(n_regions)]

    for c in contours:
        if len(c.pixels) == 0:
            continue
        # unique pixels of this contour, keeping first-visit order
        enc = c.pixels[:, 1].astype(np.int64) * w + c.pixels[:, 0]
        _, first_idx = np.unique(enc, return_index=True)
        pix = c.pixels[np.sort(first_idx)]
        xs = pix[:, 0].astype(np.int64)
        ys = pix[:, 1].astype(np.int64)
        touched = np.zeros((len(pix), n_regions), dtype=bool)
        for dy, dx in zip(_DY, _DX):
            nx = xs + dx
            ny = ys + dy
            ok = (nx >= 0) & (nx < w) & (ny >= 0) & (ny < h)
            rid = np.full(len(pix), -1, dtype=np.int32)
            rid[ok] = region_id[ny[ok], nx[ok]]
            hit = rid >= 0
            touched[np.nonzero(hit)[0], rid[hit]] = True
        for r in range(n_regions):
            sel = touched[:, r]
            if sel.any():
                per_region_xy[r].append(pix[sel])
                per_region_cids[r].append(c.id)

    regions = []
    for r in range(n_regions):
        if per_region_xy[r]:
            xy = np.concatenate(per_region_xy[r], axis=0)
            # union across contours: drop pixels already contributed earlier
            enc = xy[:, 1].astype(np.int64) * w + xy[:, 0]
            _, first_idx = np.unique(enc, return_index=True)
            xy = xy[np.sort(first_idx)].astype(np.int32)
            z = depth.depth[xy[:, 1], xy[:, 0]].astype(np.float64)
            regions.append(Region(r, per_region_cids[r], xy, z, flagged=False))
        else:
            regions.append(Region(r, [], np.zeros((0, 2), dtype=np.int32),
                                  np.zeros(0), flagged=True))
    return VoidSpaceMap(region_id, regions, list(contours))


def region_stats(vmap: VoidSpaceMap) -> RegionStats:
    max_samples = max((len(r.sample_z) for r in vmap.regions), default=0)
    return RegionStats(len(vmap.regions), max_samples)


def contours_to_json(contours: list[Contour]) -> list[dict]:
    return [
        {
            "id": c.id,
            "kind": c.kind,
            "parent": c.parent,
            "pixels": [[int(x), int(y)] for x, y in c.pixels],
        }
        for c in contours
    ]
